//! The registered experiments. Each reads its parameters and tolerances from
//! the manifest and returns the checks it performed.

use std::sync::Arc;
use std::time::Instant;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use normlab_core::algsys::{apply_ca, modp_add, LinearCA};
use normlab_core::analysis::{
    complexity_curve, count_low_entropy_blocks, eps_m_goodness, switch_density,
};
use normlab_core::bitarith::{
    carry_add, mul, mul_rational, neg, shifted_sum, stream_carry_add, FixedPointNumber,
};
use normlab_core::generators::{
    Bernoulli, CounterRng, FiniteSums, Kappa, Uniform, VFraction, YFraction,
};
use normlab_core::grayorder::{verify_ordering, Variant};
use normlab_core::pnormal::{carry_digit_prob, conditional_digit_prob, monte_carlo_carry_sum};
use normlab_core::seqcore::{
    base4_split, empirical_measure, joint_frequency, prefix_frequency, Periodic,
};
use normlab_core::{Alphabet, Block, DigitString, SeqRef, SymbolicSequence, Window};

use crate::manifest::{ExperimentConfig, Manifest};
use crate::report::{content_hash, Check, ExperimentReport, SCHEMA_VERSION};
use crate::CliError;

/// What an experiment body produces.
pub struct Outcome {
    pub checks: Vec<Check>,
    pub data: Value,
}

impl Outcome {
    fn checks(checks: Vec<Check>) -> Self {
        Outcome {
            checks,
            data: Value::Null,
        }
    }
}

type Body = fn(&ExperimentConfig) -> Result<Outcome, CliError>;

pub struct Experiment {
    pub name: &'static str,
    body: Body,
}

/// Every experiment, in criterion order.
pub const REGISTRY: &[Experiment] = &[
    Experiment {
        name: "kappa-prefix",
        body: kappa_prefix,
    },
    Experiment {
        name: "gray-invariants",
        body: gray_invariants,
    },
    Experiment {
        name: "vy-identity",
        body: vy_identity,
    },
    Experiment {
        name: "z-leading-digits",
        body: z_leading_digits,
    },
    Experiment {
        name: "z-switch-half",
        body: z_switch_half,
    },
    Experiment {
        name: "xy-switch-density",
        body: xy_switch_density,
    },
    Experiment {
        name: "kappa-goodness",
        body: kappa_goodness,
    },
    Experiment {
        name: "pnormal-closed-forms",
        body: pnormal_closed_forms,
    },
    Experiment {
        name: "carry-monte-carlo",
        body: carry_monte_carlo,
    },
    Experiment {
        name: "low-entropy-counts",
        body: low_entropy_counts,
    },
    Experiment {
        name: "complexity-contrast",
        body: complexity_contrast,
    },
    Experiment {
        name: "base4-independence",
        body: base4_independence,
    },
    Experiment {
        name: "rational-mul-normality",
        body: rational_mul_normality,
    },
    Experiment {
        name: "modp-translation",
        body: modp_translation,
    },
    Experiment {
        name: "arith-roundtrips",
        body: arith_roundtrips,
    },
];

pub fn names() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|e| e.name)
}

/// Runs one experiment with optional parameter overrides.
pub fn run_experiment(
    manifest: &Manifest,
    name: &str,
    overrides: &[(String, String)],
) -> Result<ExperimentReport, CliError> {
    let experiment = REGISTRY
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CliError::Usage(format!("unknown experiment {name:?}")))?;
    let cfg = manifest.get(name)?.with_overrides(overrides)?;
    let parameters = serde_json::to_value(&cfg.params)?;
    let tolerances = serde_json::to_value(&cfg.tolerances)?;
    let inputs = serde_json::to_vec(&json!({
        "experiment": name,
        "parameters": parameters,
        "tolerances": tolerances,
    }))?;
    let started = Instant::now();
    let outcome = (experiment.body)(&cfg)?;
    let runtime_s = started.elapsed().as_secs_f64();
    let passed = !outcome.checks.is_empty() && outcome.checks.iter().all(|c| c.passed);
    Ok(ExperimentReport {
        schema_version: SCHEMA_VERSION,
        experiment: name.into(),
        criterion: cfg.criterion,
        source: cfg.source.clone(),
        parameters,
        tolerances,
        checks: outcome.checks,
        data: outcome.data,
        passed,
        runtime_s,
        budget_s: cfg.budget_s,
        within_budget: runtime_s <= cfg.budget_s,
        input_hash: content_hash(&inputs),
    })
}

fn bits(text: &str) -> Result<Vec<u8>, CliError> {
    text.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(CliError::Usage(format!("{text:?} is not a binary string"))),
        })
        .collect()
}

fn kappa_prefix(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let expected = bits(&cfg.param_str("expected")?)?;
    let got = Kappa.prefix(expected.len() as u64)?;
    let show = |d: &[u8]| d.iter().map(|b| char::from(b'0' + b)).collect::<String>();
    Ok(Outcome::checks(vec![Check::equal(
        "digits",
        show(&got),
        show(&expected),
    )]))
}

fn gray_invariants(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let max_n = cfg.param_usize("max_n")?;
    let starts = cfg.param_u64("starts")?;
    let rng = CounterRng::new(cfg.param_u64("seed")?);
    let cases: Vec<(usize, u64)> = (1..=max_n)
        .flat_map(|n| (0..starts).map(move |s| (n, s)))
        .collect();
    let results: Vec<(usize, bool, Option<bool>)> = cases
        .par_iter()
        .map(|&(n, s)| -> Result<_, CliError> {
            let sub = rng.substream((n as u64) << 32 | s);
            let start = Block::new(
                (0..n as u64).map(|i| sub.digit(i, 2)).collect(),
                Alphabet::BINARY,
            )?;
            let plain = verify_ordering(n, &start, Variant::Plain)?.passed();
            let alternated = if n % 2 == 0 {
                Some(verify_ordering(n, &start, Variant::Alternated)?.passed())
            } else {
                None
            };
            Ok((n, plain, alternated))
        })
        .collect::<Result<_, _>>()?;
    let plain_failures = results.iter().filter(|r| !r.1).count();
    let alt_checked = results.iter().filter(|r| r.2.is_some()).count();
    let alt_failures = results.iter().filter(|r| r.2 == Some(false)).count();
    Ok(Outcome {
        checks: vec![
            Check::equal("ordering_failures", plain_failures, 0),
            Check::equal("alternated_bijection_failures", alt_failures, 0),
            Check::equal("cases", results.len(), max_n * starts as usize),
        ],
        data: json!({ "alternated_cases": alt_checked }),
    })
}

fn vy_identity(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let frac = cfg.param_usize("frac")?;
    let guard = cfg.param_usize("guard")?;
    let v = FixedPointNumber::from_sequence(&VFraction, 0, frac, guard)?;
    let y = FixedPointNumber::from_sequence(&YFraction, 1, frac, guard)?;
    let product = mul(&v, &y, frac)?;
    let distance = product.distance_to_integer_log2(1);
    Ok(Outcome {
        checks: vec![Check::at_most(
            "log2_distance_to_one",
            distance,
            cfg.tol("max_distance_log2")?,
        )],
        data: json!({
            "certified_digits": product.certified_digits(),
            "error_bound_log2": product.error_bound_log2(),
        }),
    })
}

fn z_number(frac: usize, guard: usize) -> Result<FixedPointNumber, CliError> {
    let y = FixedPointNumber::from_sequence(&YFraction, 1, frac, guard)?;
    Ok(mul_rational(&y, 4, 3, frac)?)
}

fn z_leading_digits(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let expected = bits(&cfg.param_str("expected")?)?;
    let z = z_number(cfg.param_usize("frac")?, cfg.param_usize("guard")?)?;
    Ok(Outcome::checks(vec![
        Check::equal("integer_part", z.integer_part().to_string(), "1"),
        Check::equal(
            "leading_digits",
            z.fraction_digits(expected.len()),
            expected.clone(),
        ),
        Check::holds(
            "leading_digits_certified",
            z.certified_digits() >= expected.len(),
        ),
    ]))
}

fn z_switch_half(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let frac = cfg.param_usize("frac")?;
    let z = z_number(frac, cfg.param_usize("guard")?)?;
    let digits = DigitString::binary(z.fraction_digits(frac))?;
    let f = prefix_frequency(&digits, &Block::binary("01")?, frac as u64)?;
    Ok(Outcome {
        checks: vec![
            Check::within("freq_01", f.as_f64(), 0.5, cfg.tol("max_deviation")?),
            Check::holds("prefix_certified", z.certified_digits() >= frac),
        ],
        data: json!({ "count": f.count, "total": f.total }),
    })
}

/// Fractional digits of `κ · y` from the shifted sum over `S`.
fn xy_digits(frac: usize, guard: usize) -> Result<(DigitString, usize), CliError> {
    let xy = shifted_sum(&Kappa, &FiniteSums, frac, guard)?;
    Ok((
        DigitString::binary(xy.fraction_digits(frac))?,
        xy.certified_digits(),
    ))
}

fn xy_switch_density(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let frac = cfg.param_usize("frac")?;
    let (digits, certified) = xy_digits(frac, cfg.param_usize("guard")?)?;
    let lo = cfg.param_u64("min_log2")?;
    let hi = cfg.param_u64("max_log2")?;
    let curve: Vec<(u64, f64)> = (lo..=hi)
        .step_by(2)
        .map(|k| Ok((1u64 << k, switch_density(&digits, 1 << k)?.as_f64())))
        .collect::<Result<_, CliError>>()?;
    let slack = cfg.tol("monotone_slack")?;
    let worst_rise = curve
        .windows(2)
        .map(|w| w[1].1 - w[0].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let last = curve.last().map(|c| c.1).unwrap_or(f64::NAN);
    Ok(Outcome {
        checks: vec![
            Check::at_most("switch_density", last, cfg.tol("max_density")?),
            Check::at_most("largest_rise", worst_rise, slack),
            Check::holds("prefix_certified", certified >= frac),
        ],
        data: json!({ "curve": curve }),
    })
}

fn kappa_goodness(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let len = cfg.param_u64("len")?;
    let factor = cfg.tol("factor")?;
    let digits = DigitString::from_sequence(&Kappa, len)?;
    let checks = (1..=cfg.param_usize("max_m")?)
        .map(|m| {
            let g = eps_m_goodness(&digits, len, m)?;
            Ok(Check::at_most(
                &format!("goodness_m{m}"),
                g,
                factor * (-(m as f64)).exp2(),
            ))
        })
        .collect::<Result<_, CliError>>()?;
    Ok(Outcome::checks(checks))
}

fn random_unit_rational(rng: &CounterRng, i: u64) -> BigRational {
    let d = 2 + rng.word(2 * i) % 1_000_000;
    let n = 1 + rng.word(2 * i + 1) % (d - 1);
    BigRational::new(n.into(), d.into())
}

fn pnormal_closed_forms(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p = cfg.param_rational("p")?;
    let (big_p, pprime) = carry_digit_prob(&p)?;
    let q = BigRational::one() - &p;
    let two = BigRational::from_integer(2.into());
    let direct = &p * &p + &two * &p * &q * &q * &q / (&p * &p + &q * &q);
    let (q0, p0, pprime0) = conditional_digit_prob(&p)?;
    let direct_q0 = &q * &q / (&p * &p + &q * &q + &two * &p * &p * &p / &q);

    let rng = CounterRng::new(cfg.param_u64("seed")?);
    let trials = cfg.param_u64("random_rationals")?;
    let symmetric = (0..trials)
        .map(|i| {
            let r = random_unit_rational(&rng, i);
            let (_, a) = carry_digit_prob(&r)?;
            let (_, b) = carry_digit_prob(&(BigRational::one() - &r))?;
            Ok(a + b == BigRational::one())
        })
        .collect::<Result<Vec<bool>, CliError>>()?
        .into_iter()
        .filter(|&ok| ok)
        .count();

    let grid = cfg.param_u64("grid")?;
    let mut roots = Vec::new();
    let mut prev: Option<bool> = None;
    for k in 1..grid {
        let x = BigRational::new(k.into(), grid.into());
        let d = carry_digit_prob(&x)?.1 - &x;
        if d.is_zero() {
            roots.push(x.to_string());
            prev = None;
        } else {
            let s = d.is_positive();
            if prev.is_some_and(|ps| ps != s) {
                roots.push(format!("sign change before {x}"));
            }
            prev = Some(s);
        }
    }
    Ok(Outcome::checks(vec![
        Check::equal("P", big_p.to_string(), cfg.param_str("big_p")?),
        Check::equal("pprime", pprime.to_string(), cfg.param_str("pprime")?),
        Check::holds("pprime_matches_substitution", pprime == direct),
        Check::holds("Q0_matches_substitution", q0 == direct_q0),
        Check::holds("Q0_plus_P0_is_one", &q0 + &p0 == BigRational::one()),
        Check::holds("pprime0_exceeds_pprime", pprime0 > pprime),
        Check::equal("symmetric_pairs", symmetric, trials),
        Check::equal("fixed_points", roots, ["1/2"]),
    ]))
}

fn carry_monte_carlo(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let p = cfg.param_rational("p")?;
    let (_, pprime) = carry_digit_prob(&p)?;
    let (_, _, pprime0) = conditional_digit_prob(&p)?;
    let (pprime, pprime0) = (
        pprime.to_f64().unwrap_or(f64::NAN),
        pprime0.to_f64().unwrap_or(f64::NAN),
    );
    let mc = monte_carlo_carry_sum(
        p.to_f64().unwrap_or(f64::NAN),
        cfg.param_u64("seed")?,
        cfg.param_u64("n")?,
    )?;
    let k = cfg.tol("sigmas")?;
    Ok(Outcome {
        checks: vec![
            Check::within("freq_one", mc.freq_one, pprime, k * mc.sigma(pprime)),
            Check::within(
                "freq_one_given_next_zero",
                mc.freq_one_given_next_zero,
                pprime0,
                k * mc.conditional_sigma(pprime0),
            ),
            Check::holds(
                "conditional_exceeds_unconditional",
                mc.freq_one_given_next_zero > mc.freq_one,
            ),
        ],
        data: serde_json::to_value(&mc)?,
    })
}

fn low_entropy_counts(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let cases = cfg
        .param("cases")?
        .as_array()
        .ok_or_else(|| CliError::Usage("cases must be a list".into()))?;
    let mut checks = Vec::new();
    let mut rows = Vec::new();
    for case in cases {
        let row = case
            .as_array()
            .filter(|r| r.len() == 4)
            .ok_or_else(|| CliError::Usage("each case is [m, n, c, count]".into()))?;
        let int = |v: &toml::Value| v.as_integer().map(|i| i as usize);
        let (Some(m), Some(n), Some(c), Some(want)) = (
            int(&row[0]),
            int(&row[1]),
            crate::manifest::as_f64(&row[2]),
            int(&row[3]),
        ) else {
            return Err(CliError::Usage("malformed low-entropy case".into()));
        };
        let got = count_low_entropy_blocks(m, n, c)?;
        checks.push(Check::equal(
            &format!("count_m{m}_n{n}_c{c}"),
            got.count,
            want as u64,
        ));
        rows.push(got);
    }
    Ok(Outcome {
        checks,
        data: serde_json::to_value(rows)?,
    })
}

fn complexity_contrast(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let eps = cfg.param_f64("eps")?;
    let y_len = cfg.param_u64("y_len")?;
    let y_max_m = cfg.param_usize("y_max_m")?;
    let y = complexity_curve(&YFraction, y_len, eps, 1..=y_max_m)?;
    let y_worst = y.rows.iter().map(|r| r.complexity).max().unwrap_or(0);
    let kappa_len = cfg.param_u64("kappa_len")?;
    let kappa_m = cfg.param_usize("kappa_m")?;
    let kappa = DigitString::from_sequence(&Kappa, kappa_len)?;
    let k = complexity_curve(&kappa, kappa_len, eps, 1..=kappa_m)?;
    let k_at_m = k.rows.last().map(|r| r.complexity).unwrap_or(0);
    Ok(Outcome {
        checks: vec![
            Check::at_most(
                "y_max_complexity",
                y_worst as f64,
                cfg.tol("y_max_complexity")?,
            ),
            Check::holds("y_subexponential", y.subexponential),
            Check::at_least(
                "kappa_complexity",
                k_at_m as f64,
                cfg.tol("kappa_min_complexity")?,
            ),
            Check::holds("kappa_not_subexponential", !k.subexponential),
        ],
        data: json!({ "y": y, "kappa": k }),
    })
}

/// `|f - p| <= k·sqrt(p(1-p)/n)` for every listed pair.
fn binomial_checks(prefix: &str, rows: Vec<(String, f64, f64, u64)>, k: f64) -> Vec<Check> {
    rows.into_iter()
        .map(|(label, f, p, n)| {
            Check::within(
                &format!("{prefix}_{label}"),
                f,
                p,
                k * (p * (1.0 - p) / n as f64).sqrt(),
            )
        })
        .collect()
}

fn base4_independence(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let n = cfg.param_u64("n")?;
    let k = cfg.tol("sigmas")?;
    let source: SeqRef = Arc::new(Uniform::new(Alphabet::new(4)?, cfg.param_u64("seed")?));
    let quaternary = DigitString::from_sequence(source.as_ref(), n)?;
    let (top, bottom) = base4_split(Arc::new(quaternary))?;
    let top = DigitString::from_sequence(&top, n)?;
    let bottom = DigitString::from_sequence(&bottom, n)?;
    let mut checks = Vec::new();
    for m in 1..=2usize {
        let blocks: Vec<Block> = (0..1u64 << m)
            .map(|c| Block::from_code(c, m, Alphabet::BINARY))
            .collect();
        let marg = |s: &DigitString| -> Result<Vec<f64>, CliError> {
            blocks
                .iter()
                .map(|b| Ok(prefix_frequency(s, b, n)?.as_f64()))
                .collect()
        };
        let (mt, mb) = (marg(&top)?, marg(&bottom)?);
        let rows = blocks
            .par_iter()
            .enumerate()
            .flat_map(|(i, b1)| {
                let (top, bottom, mt, mb) = (&top, &bottom, &mt, &mb);
                blocks.par_iter().enumerate().map(move |(j, b2)| {
                    let f = joint_frequency(top, bottom, b1, b2, n)?;
                    Ok((format!("{b1}|{b2}"), f.as_f64(), mt[i] * mb[j], f.total))
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        checks.extend(binomial_checks(&format!("joint{m}"), rows, k));
    }
    Ok(Outcome::checks(checks))
}

fn rational_mul_normality(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let frac = cfg.param_usize("frac")?;
    let guard = cfg.param_usize("guard")?;
    let max_m = cfg.param_usize("max_m")?;
    let factor = cfg.tol("factor")?;
    let x = FixedPointNumber::from_sequence(
        &Bernoulli::new(0.5, cfg.param_u64("seed")?)?,
        0,
        frac,
        guard,
    )?;
    let mut checks = Vec::new();
    let mut data = serde_json::Map::new();
    for (label, p, q) in [("times3", 3i64, 1u64), ("third", 1, 3)] {
        let product = mul_rational(&x, p, q, frac)?.fract();
        let certified = product.certified_digits();
        data.insert(label.into(), json!({ "certified_digits": certified }));
        checks.push(Check::at_least(
            &format!("{label}_certified"),
            certified as f64,
            frac as f64,
        ));
        let digits = DigitString::binary(product.fraction_digits(certified))?;
        for m in 1..=max_m {
            let g = eps_m_goodness(&digits, certified as u64, m)?;
            checks.push(Check::at_most(
                &format!("{label}_goodness_m{m}"),
                g,
                factor * (-(m as f64)).exp2(),
            ));
        }
    }
    Ok(Outcome {
        checks,
        data: Value::Object(data),
    })
}

fn modp_translation(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let n = cfg.param_u64("n")?;
    let k = cfg.tol("sigmas")?;
    let r3 = Alphabet::new(3)?;
    let uniform: SeqRef = Arc::new(Uniform::new(r3, cfg.param_u64("seed")?));
    let periodic: SeqRef = Arc::new(Periodic::new(Block::new(vec![0, 1, 2], r3)?));
    let sum = modp_add(uniform, periodic)?;
    let measure = empirical_measure(&sum, 2, &Window::Prefix(n))?;
    let rows = (0..9)
        .map(|c| {
            let b = Block::from_code(c, 2, r3);
            (
                b.to_string(),
                measure.fraction(&b).as_f64(),
                1.0 / 9.0,
                measure.total,
            )
        })
        .collect();
    let mut checks = binomial_checks("two_block", rows, k);

    let ca_len = cfg.param_usize("ca_len")?;
    let (xy, _) = xy_digits(ca_len, 64)?;
    let image = apply_ca(&LinearCA::new(2, vec![1, 1])?, &xy, ca_len as u64 - 1)?;
    let ones = prefix_frequency(&image, &Block::binary("1")?, ca_len as u64 - 1)?;
    let switches = switch_density(&xy, ca_len as u64)?;
    checks.push(Check::equal(
        "ca_ones_equal_switches",
        (ones.count, ones.total),
        (switches.count, switches.total),
    ));
    Ok(Outcome::checks(checks))
}

fn arith_roundtrips(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let pairs = cfg.param_u64("pairs")?;
    let frac = cfg.param_usize("frac")?;
    let guard = cfg.param_usize("guard")?;
    let stream_len = cfg.param_u64("stream_len")?;
    let lookahead = cfg.param_u64("lookahead")?;
    let neg_ulps = cfg.tol("neg_ulps")?;
    let mulq_ulps = cfg.tol("mulq_ulps")?;
    let rng = CounterRng::new(cfg.param_u64("seed")?);

    let per_pair = (0..pairs)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64, usize, usize), CliError> {
            let sub = rng.substream(i);
            let a = Bernoulli::new(0.5, sub.word(0))?;
            let b = Bernoulli::new(0.5, sub.word(1))?;

            // x + (-x) vanishes mod 1. Both distances are in ulps of the
            // `frac`-digit output, error bounds included.
            let x = FixedPointNumber::from_sequence(&a, 0, frac, guard)?;
            let sum = carry_add(&x, &neg(&x)?).fract();
            let ulps0 = sum.distance_to_integer_ulps(0);
            let ulps1 = sum.distance_to_integer_ulps(1);
            let neg_err =
                ulps0.min(ulps1).to_f64().unwrap_or(f64::INFINITY) / (guard as f64).exp2();

            let p = 1 + (sub.word(2) % 1000) as i64;
            let q = 1 + sub.word(3) % 1000;
            let there = mul_rational(&x, p, q, frac)?;
            let back = mul_rational(&there, q as i64, p as u64, frac)?;
            let diff = (back.raw() - x.raw()).abs();
            let mulq_err = diff.to_f64().unwrap_or(f64::INFINITY) / (guard as f64).exp2();

            let streamed = stream_carry_add(&a, &b, stream_len, lookahead)?;
            let total = (stream_len + lookahead) as usize;
            let xa = FixedPointNumber::from_digits(false, 0, &a.prefix(total as u64)?, total, 0)?;
            let xb = FixedPointNumber::from_digits(false, 0, &b.prefix(total as u64)?, total, 0)?;
            let batch = carry_add(&xa, &xb).fraction_digits(total);
            let disagreements = streamed
                .digits
                .iter()
                .zip(&batch)
                .filter(|(s, b)| s.is_some_and(|s| s != **b))
                .count();
            Ok((neg_err, mulq_err, disagreements, streamed.ambiguous_count()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let worst_neg = per_pair.iter().map(|r| r.0).fold(0.0, f64::max);
    let worst_mulq = per_pair.iter().map(|r| r.1).fold(0.0, f64::max);
    let disagreements: usize = per_pair.iter().map(|r| r.2).sum();
    let ambiguous: usize = per_pair.iter().map(|r| r.3).sum();
    Ok(Outcome {
        checks: vec![
            Check::at_most("neg_inverse_ulps", worst_neg, neg_ulps),
            Check::at_most("mulq_roundtrip_ulps", worst_mulq, mulq_ulps),
            Check::equal("stream_batch_disagreements", disagreements, 0),
            Check::equal("pairs", per_pair.len(), pairs),
        ],
        data: json!({ "ambiguous_stream_digits": ambiguous }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_matches_manifest() {
        let m = Manifest::builtin();
        let registered: Vec<&str> = names().collect();
        let listed: Vec<&str> = m.experiments.keys().map(String::as_str).collect();
        let mut sorted = registered.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, listed);
    }

    #[test]
    fn unknown_experiment_is_usage_error() {
        let m = Manifest::builtin();
        assert!(matches!(
            run_experiment(&m, "nope", &[]),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn small_runs_pass() {
        let m = Manifest::builtin();
        let r = run_experiment(&m, "kappa-prefix", &[]).unwrap();
        assert!(r.passed, "{}", r.to_text());
        let r = run_experiment(&m, "gray-invariants", &[("max_n".into(), "6".into())]).unwrap();
        assert!(r.passed, "{}", r.to_text());
        let r = run_experiment(&m, "carry-monte-carlo", &[("n".into(), "10000".into())]).unwrap();
        assert_eq!(r.checks.len(), 3);
    }

    #[test]
    fn reports_are_reproducible() {
        let m = Manifest::builtin();
        let over = [("n".into(), "20000".into())];
        let a = run_experiment(
            &m,
            "modp-translation",
            &[("ca_len".into(), "4096".into()), over[0].clone()],
        )
        .unwrap();
        let b = run_experiment(
            &m,
            "modp-translation",
            &[("ca_len".into(), "4096".into()), over[0].clone()],
        )
        .unwrap();
        assert_eq!(a.input_hash, b.input_hash);
        assert_eq!(
            serde_json::to_string(&a.checks).unwrap(),
            serde_json::to_string(&b.checks).unwrap()
        );
    }
}
