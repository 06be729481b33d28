use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::generators::CounterRng;

/// `x ↦ Ax mod 1` on the `d`-torus, for a nonsingular integer matrix `A`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ToralMap {
    matrix: Vec<Vec<i64>>,
    /// Characteristic polynomial `det(xI - A)`, constant term first.
    #[serde(skip)]
    char_poly: Vec<BigInt>,
    ergodic: bool,
}

impl ToralMap {
    pub fn new(matrix: Vec<Vec<i64>>) -> Result<Self> {
        let d = matrix.len();
        if d == 0 || matrix.iter().any(|row| row.len() != d) {
            return Err(Error::Domain("matrix must be square and nonempty".into()));
        }
        let char_poly = characteristic_polynomial(&matrix);
        // det(A) = (-1)^d · χ(0).
        if char_poly[0].is_zero() {
            return Err(Error::Domain("matrix is singular".into()));
        }
        let ergodic = !has_root_of_unity(&char_poly);
        Ok(ToralMap {
            matrix,
            char_poly,
            ergodic,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<i64>] {
        &self.matrix
    }

    pub fn characteristic_polynomial(&self) -> &[BigInt] {
        &self.char_poly
    }

    pub fn determinant(&self) -> BigInt {
        if self.dim().is_multiple_of(2) {
            self.char_poly[0].clone()
        } else {
            -self.char_poly[0].clone()
        }
    }

    /// No eigenvalue is a root of unity.
    pub fn is_ergodic(&self) -> bool {
        self.ergodic
    }

    /// Induced 1-norm: the largest absolute column sum.
    pub fn norm1(&self) -> u64 {
        (0..self.dim())
            .map(|j| self.matrix.iter().map(|row| row[j].unsigned_abs()).sum())
            .max()
            .unwrap_or(0)
    }

    fn apply_rational(&self, x: &[BigRational]) -> Vec<BigRational> {
        self.matrix
            .iter()
            .map(|row| {
                let s = row
                    .iter()
                    .zip(x)
                    .fold(BigRational::zero(), |acc, (&a, xi)| {
                        acc + xi * BigInt::from(a)
                    });
                s.clone() - s.floor()
            })
            .collect()
    }

    fn apply_residues(&self, x: &[BigInt], modulus: &BigInt) -> Vec<BigInt> {
        self.matrix
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .fold(BigInt::zero(), |acc, (&a, xi)| acc + xi * a)
                    .mod_floor(modulus)
            })
            .collect()
    }
}

/// Faddeev-LeVerrier over the integers; every division is exact.
fn characteristic_polynomial(a: &[Vec<i64>]) -> Vec<BigInt> {
    let d = a.len();
    let big: Vec<Vec<BigInt>> = a
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let matmul = |x: &Vec<Vec<BigInt>>, y: &Vec<Vec<BigInt>>| -> Vec<Vec<BigInt>> {
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).fold(BigInt::zero(), |acc, k| acc + &x[i][k] * &y[k][j]))
                    .collect()
            })
            .collect()
    };
    // coeffs[k] multiplies x^(d-k).
    let mut coeffs = vec![BigInt::one()];
    let mut m: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); d]; d];
    for k in 1..=d {
        for (i, row) in m.iter_mut().enumerate() {
            row[i] += &coeffs[k - 1];
        }
        m = matmul(&big, &m);
        let trace = (0..d).fold(BigInt::zero(), |acc, i| acc + &m[i][i]);
        coeffs.push(-trace / BigInt::from(k));
    }
    coeffs.reverse();
    coeffs
}

fn poly_divmod(num: &[BigInt], den: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    // den is monic.
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    if rem.len() <= dd {
        return (vec![BigInt::zero()], rem);
    }
    let mut quot = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dd].clone();
        if !c.is_zero() {
            for (j, dj) in den.iter().enumerate() {
                rem[i + j] -= &c * dj;
            }
        }
        quot[i] = c;
    }
    rem.truncate(dd.max(1));
    (quot, rem)
}

fn totient(n: u64) -> u64 {
    (1..=n).filter(|k| k.gcd(&n) == 1).count() as u64
}

/// `Φ_n` from `x^n - 1 = Π_{k | n} Φ_k`.
fn cyclotomic(n: u64, cache: &mut Vec<Vec<BigInt>>) -> Vec<BigInt> {
    while cache.len() <= n as usize {
        let k = cache.len() as u64;
        if k == 0 {
            cache.push(vec![]);
            continue;
        }
        let mut p = vec![BigInt::zero(); k as usize + 1];
        p[0] = -BigInt::one();
        p[k as usize] = BigInt::one();
        for j in (1..k).filter(|j| k.is_multiple_of(*j)) {
            p = poly_divmod(&p, &cache[j as usize]).0;
        }
        cache.push(p);
    }
    cache[n as usize].clone()
}

/// Whether some cyclotomic `Φ_n` of degree at most `deg χ` divides `χ`.
/// `Φ_n` is irreducible, so a shared factor means `Φ_n | χ`; `φ(n) >= sqrt(n/2)`
/// bounds the search to `n <= 2d²`.
fn has_root_of_unity(chi: &[BigInt]) -> bool {
    let d = chi.len() as u64 - 1;
    let mut cache = Vec::new();
    (1..=2 * d * d + 2).filter(|&n| totient(n) <= d).any(|n| {
        let phi = cyclotomic(n, &mut cache);
        poly_divmod(chi, &phi).1.iter().all(Zero::is_zero)
    })
}

/// Starting point of an orbit.
#[derive(Debug, Clone)]
pub enum OrbitStart {
    /// Exact rational coordinates, taken mod 1.
    Rational(Vec<BigRational>),
    /// Dyadic coordinates `residue / 2^precision`, standing in for reals known
    /// to within one unit in the last place.
    Dyadic {
        residues: Vec<BigUint>,
        precision: u32,
    },
}

impl OrbitStart {
    /// Pseudorandom dyadic point with `precision` bits per coordinate.
    pub fn random(dim: usize, precision: u32, seed: u64) -> Self {
        let rng = CounterRng::new(seed);
        let words = (precision as usize).div_ceil(64);
        let residues = (0..dim)
            .map(|i| {
                let sub = rng.substream(i as u64);
                let limbs: Vec<u32> = (1..=words as u64)
                    .flat_map(|w| {
                        let x = sub.word(w);
                        [x as u32, (x >> 32) as u32]
                    })
                    .collect();
                BigUint::from_slice(&limbs) >> (words * 64 - precision as usize)
            })
            .collect();
        OrbitStart::Dyadic {
            residues,
            precision,
        }
    }

    /// Truncation of rational coordinates to `precision` bits.
    pub fn dyadic_from_rational(x: &[BigRational], precision: u32) -> Self {
        let scale = BigInt::one() << precision;
        let residues = x
            .iter()
            .map(|xi| {
                let frac = xi - xi.floor();
                (frac * &scale)
                    .floor()
                    .to_integer()
                    .to_biguint()
                    .expect("fraction is nonnegative")
            })
            .collect();
        OrbitStart::Dyadic {
            residues,
            precision,
        }
    }

    fn dim(&self) -> usize {
        match self {
            OrbitStart::Rational(x) => x.len(),
            OrbitStart::Dyadic { residues, .. } => residues.len(),
        }
    }
}

/// An orbit with its grid statistic and error accounting.
#[derive(Debug, Clone, Serialize)]
pub struct ToralOrbit {
    pub steps: u64,
    /// Coordinates of `x_0, …, x_steps` rounded to `f64`.
    pub points: Vec<Vec<f64>>,
    /// Exact points in rational mode.
    #[serde(skip)]
    pub exact: Option<Vec<Vec<BigRational>>>,
    /// Exact dyadic residues in fixed-point mode.
    #[serde(skip)]
    pub residues: Option<Vec<Vec<BigUint>>>,
    /// Bits per axis of the counting grid.
    pub grid_bits: u32,
    /// `max_cell |count/(steps+1) - 1/cells|`.
    pub discrepancy: f64,
    /// `log2` of the 1-norm error bound at each step, `None` in rational mode.
    pub error_log2: Option<Vec<f64>>,
    /// Steps whose error bound stays below one grid cell.
    pub certified_steps: u64,
    pub ergodic: bool,
}

/// Iterates `map` from `start` for `steps` steps and counts visits in a grid
/// of `2^grid_bits` cells per axis.
///
/// Rational starts are iterated exactly. Dyadic starts are iterated exactly
/// as residues mod `2^precision`; relative to the real point they truncate,
/// the 1-norm error starts below `d` ulps and grows at most by `‖A‖₁` per
/// step. A step is certified while that bound is at most `2^-grid_bits`.
pub fn toral_orbit(
    map: &ToralMap,
    start: &OrbitStart,
    steps: u64,
    grid_bits: u32,
) -> Result<ToralOrbit> {
    let d = map.dim();
    if start.dim() != d {
        return Err(Error::Domain(format!(
            "start has {} coordinates, map has {d}",
            start.dim()
        )));
    }
    if grid_bits == 0 || grid_bits as usize * d > 24 {
        return Err(Error::Budget(format!(
            "grid of 2^{} cells",
            grid_bits as usize * d
        )));
    }
    let cells = 1usize << (grid_bits as usize * d);
    let mut counts = vec![0u64; cells];
    let mut points = Vec::with_capacity(steps as usize + 1);
    let cell_of = |coords: &[u64]| {
        coords
            .iter()
            .fold(0usize, |acc, &c| (acc << grid_bits) | c as usize)
    };

    let (exact, residues, error_log2, certified_steps) = match start {
        OrbitStart::Rational(x0) => {
            let mut x: Vec<BigRational> = x0.iter().map(|xi| xi - xi.floor()).collect();
            let grid = BigInt::one() << grid_bits;
            let mut all = Vec::with_capacity(steps as usize + 1);
            for t in 0..=steps {
                if t > 0 {
                    x = map.apply_rational(&x);
                }
                let coords: Vec<u64> = x
                    .iter()
                    .map(|xi| (xi * &grid).floor().to_integer().to_u64().unwrap_or(0))
                    .collect();
                counts[cell_of(&coords)] += 1;
                points.push(x.iter().map(|xi| xi.to_f64().unwrap_or(f64::NAN)).collect());
                all.push(x.clone());
            }
            (Some(all), None, None, steps)
        }
        OrbitStart::Dyadic {
            residues,
            precision,
        } => {
            if *precision < grid_bits {
                return Err(Error::Precision(format!(
                    "{precision} bits cannot resolve a 2^{grid_bits} grid"
                )));
            }
            let modulus = BigInt::one() << *precision;
            let mut x: Vec<BigInt> = residues.iter().map(|r| BigInt::from(r.clone())).collect();
            if x.iter().any(|xi| *xi >= modulus) {
                return Err(Error::Domain("residue exceeds the modulus".into()));
            }
            let growth = (map.norm1() as f64).log2();
            let base = (d as f64).log2() - f64::from(*precision);
            let errors: Vec<f64> = (0..=steps).map(|t| base + t as f64 * growth).collect();
            let certified = errors[1..]
                .iter()
                .take_while(|&&e| e <= -f64::from(grid_bits))
                .count() as u64;
            let shift = precision - grid_bits;
            let mut all = Vec::with_capacity(steps as usize + 1);
            for t in 0..=steps {
                if t > 0 {
                    x = map.apply_residues(&x, &modulus);
                }
                let coords: Vec<u64> = x
                    .iter()
                    .map(|xi| (xi >> shift).to_u64().unwrap_or(0))
                    .collect();
                counts[cell_of(&coords)] += 1;
                points.push(
                    x.iter()
                        .map(|xi| {
                            let top = if *precision > 53 {
                                xi >> (precision - 53)
                            } else {
                                xi.clone()
                            };
                            top.to_f64().unwrap_or(f64::NAN) / f64::from(*precision.min(&53)).exp2()
                        })
                        .collect(),
                );
                all.push(x.iter().map(|xi| xi.magnitude().clone()).collect());
            }
            (None, Some(all), Some(errors), certified)
        }
    };

    let total = (steps + 1) as f64;
    let ideal = 1.0 / cells as f64;
    let discrepancy = counts
        .iter()
        .map(|&c| (c as f64 / total - ideal).abs())
        .fold(0.0, f64::max);
    Ok(ToralOrbit {
        steps,
        points,
        exact,
        residues,
        grid_bits,
        discrepancy,
        error_log2,
        certified_steps,
        ergodic: map.is_ergodic(),
    })
}
