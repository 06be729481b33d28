//! Argument parsing and subcommand dispatch.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use normlab_core::algsys::{apply_ca, modp_add, toral_orbit, LinearCA, OrbitStart, ToralMap};
use normlab_core::analysis::{
    complexity_curve, count_low_entropy_blocks, entropy_profile, eps_m_goodness, switch_density,
};
use normlab_core::bitarith::{
    carry_add, mul, mul_rational, neg, shifted_sum, FixedPointNumber, DEFAULT_GUARD,
};
use normlab_core::generators::{FiniteSums, GeneratorKind};
use normlab_core::grayorder::{verify_ordering, GrayOrdering, Variant};
use normlab_core::nseq;
use normlab_core::pnormal::{monte_carlo_carry_sum, parse_rational, CarrySumStats};
use normlab_core::seqcore::FiniteSet;
use normlab_core::{Alphabet, Block, DigitString, IndexSet, SeqRef, SymbolicSequence};

use crate::experiments::{names, run_experiment};
use crate::manifest::Manifest;
use crate::report::ExperimentReport;
use crate::{exit, CliError};

#[derive(Debug, Parser)]
#[command(
    name = "normlab",
    version,
    about = "Normal and deterministic digit sequences at desk scale"
)]
pub struct Cli {
    /// Write the primary output here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for every pseudorandom choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; NORMLAB_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a generated sequence prefix as an .nseq file.
    Generate(GenerateArgs),
    /// Statistics of a stored sequence.
    Analyze(AnalyzeArgs),
    /// Fixed-point binary arithmetic on stored fractions.
    Arith(ArithArgs),
    /// Carry-sum probabilities for a Bernoulli parameter.
    Pnormal(PnormalArgs),
    /// Algebraic maps on sequences and on the torus.
    Algsys {
        #[command(subcommand)]
        op: AlgsysOp,
    },
    /// List or verify a Gray ordering.
    Gray(GrayArgs),
    /// Run the acceptance experiments.
    Verify(VerifyArgs),
    /// Run one named experiment.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Kappa,
    Y,
    V,
    Bernoulli,
    Uniform,
    Champernowne,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Number of digits.
    #[arg(long)]
    pub n: u64,
    /// Probability of a 1 for Bernoulli streams.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Alphabet size for uniform and Champernowne streams.
    #[arg(long, default_value_t = 2)]
    pub r: u16,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AnalyzeOp {
    Entropy,
    Complexity,
    Goodness,
    Switches,
    Profile,
    /// Exhaustive count of low-entropy blocks; takes no input file.
    #[value(name = "lowentropy", alias = "low-entropy")]
    LowEntropy,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_enum)]
    pub op: AnalyzeOp,
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Prefix length to use; defaults to the whole file.
    #[arg(long)]
    pub len: Option<u64>,
    /// Largest block length.
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Entropy order for low-entropy counts.
    #[arg(long, default_value_t = 1)]
    pub order: usize,
    /// Entropy threshold for low-entropy counts.
    #[arg(long, default_value_t = 0.5)]
    pub c: f64,
    /// Comma-separated prefix lengths for profiles; defaults to a dyadic ladder.
    #[arg(long, value_delimiter = ',')]
    pub windows: Vec<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArithOp {
    Add,
    Mul,
    Mulq,
    Neg,
    Shiftsum,
}

#[derive(Debug, Args)]
pub struct ArithArgs {
    #[arg(long, value_enum)]
    pub op: ArithOp,
    /// Input fractions (one or two .nseq files).
    #[arg(long = "in", required = true)]
    pub inputs: Vec<PathBuf>,
    /// Integer part of each input, in order.
    #[arg(long = "int", value_delimiter = ',')]
    pub integers: Vec<u64>,
    /// Certified output digits; defaults to the shortest input minus the guard.
    #[arg(long)]
    pub frac: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_GUARD)]
    pub guard: usize,
    /// Numerator for mulq.
    #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
    pub p: i64,
    /// Denominator for mulq.
    #[arg(long, default_value_t = 1)]
    pub q: u64,
    /// Shifts for shiftsum: comma-separated, or "fs" for the finite-sums set.
    #[arg(long, default_value = "fs")]
    pub shifts: String,
}

#[derive(Debug, Args)]
pub struct PnormalArgs {
    /// Probability, as a decimal or a fraction such as 1/5.
    #[arg(long)]
    pub p: String,
    /// Simulated digits for the Monte-Carlo estimate.
    #[arg(long)]
    pub mc: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum AlgsysOp {
    /// Digit-wise sum mod r of two .nseq files.
    ModpAdd {
        #[arg(long = "in", num_args = 2, required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Linear cellular automaton image of an .nseq file.
    Ca {
        #[arg(long = "in")]
        input: PathBuf,
        /// Coefficients a_0, a_1, ... as a JSON array.
        #[arg(long)]
        coeffs: String,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Orbit of a toral endomorphism.
    Orbit {
        /// Integer matrix as JSON, e.g. [[2,1],[1,1]].
        #[arg(long)]
        matrix: String,
        /// Exact start as a JSON array of rationals, e.g. ["1/5","2/5"].
        #[arg(long)]
        x0: Option<String>,
        /// Bits per coordinate of a seeded dyadic start, used when --x0 is absent.
        #[arg(long, default_value_t = 4096)]
        precision: u32,
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
        #[arg(long, default_value_t = 4)]
        grid_bits: u32,
    },
}

#[derive(Debug, Args)]
pub struct GrayArgs {
    /// Start block, e.g. 0110.
    #[arg(long)]
    pub start: String,
    /// Mirror every second block.
    #[arg(long)]
    pub alternated: bool,
    /// Check the ordering properties instead of listing blocks.
    #[arg(long)]
    pub verify: bool,
    /// List at most this many blocks.
    #[arg(long)]
    pub limit: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run every registered experiment.
    #[arg(long)]
    pub all: bool,
    /// Run the experiments for these criterion numbers.
    #[arg(long, value_delimiter = ',')]
    pub criterion: Vec<u32>,
    /// Alternative tolerance manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub name: String,
    /// Parameter override, key=value; repeatable.
    #[arg(long = "set", value_parser = parse_key_value)]
    pub overrides: Vec<(String, String)>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn parse_key_value(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got {s:?}"))
}

/// Rendered result of a command.
struct Output {
    json: Value,
    csv: Option<String>,
    text: String,
    /// `false` turns into exit code 1.
    passed: bool,
}

impl Output {
    fn new(json: Value, text: String) -> Self {
        Output {
            json,
            csv: None,
            text,
            passed: true,
        }
    }

    fn with_csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                exit::USAGE
            } else {
                exit::PASS
            };
        }
    };
    match run(&cli) {
        Ok(true) => exit::PASS,
        Ok(false) => exit::FAILED_CHECK,
        Err(e) => {
            eprintln!("normlab: {e}");
            e.exit_code()
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var("NORMLAB_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("NORMLAB_THREADS={v:?} is not a count"))),
        _ => Ok(flag),
    }
}

/// Runs a parsed command line; `Ok(false)` means a check failed.
pub fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(n) = thread_count(cli.threads)? {
        // A pool configured earlier in the process stays in place.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    if let Command::Generate(args) = &cli.command {
        return generate(cli, args);
    }
    let output = match &cli.command {
        Command::Generate(_) => unreachable!("handled above"),
        Command::Analyze(a) => analyze(a)?,
        Command::Arith(a) => return arith(cli, a),
        Command::Pnormal(a) => pnormal(cli, a)?,
        Command::Algsys { op } => return algsys(cli, op),
        Command::Gray(a) => gray(a)?,
        Command::Verify(a) => verify(a)?,
        Command::Experiment(a) => experiment(a)?,
    };
    emit(cli, &output)?;
    Ok(output.passed)
}

fn emit(cli: &Cli, output: &Output) -> Result<(), CliError> {
    let body = match cli.format {
        Format::Json => serde_json::to_string_pretty(&output.json)? + "\n",
        Format::Csv => output
            .csv
            .clone()
            .ok_or_else(|| CliError::Usage("this command has no CSV form".into()))?,
        Format::Text => output.text.clone(),
    };
    match &cli.out {
        Some(path) => std::fs::write(path, body)?,
        None => print!("{body}"),
    }
    Ok(())
}

fn generate(cli: &Cli, args: &GenerateArgs) -> Result<bool, CliError> {
    let kind = match args.kind {
        Kind::Kappa => GeneratorKind::Kappa,
        Kind::Y => GeneratorKind::Y,
        Kind::V => GeneratorKind::V,
        Kind::Bernoulli => GeneratorKind::Bernoulli {
            p: args.p,
            seed: cli.seed,
        },
        Kind::Uniform => GeneratorKind::Uniform {
            r: args.r,
            seed: cli.seed,
        },
        Kind::Champernowne => GeneratorKind::Champernowne { r: args.r },
    };
    let seq = kind.build()?;
    let digits = DigitString::from_sequence(seq.as_ref(), args.n)?;
    match &cli.out {
        Some(path) => nseq::save(path, &digits)?,
        None => {
            let out = Output::new(
                json!({ "kind": kind, "n": args.n, "digits": digit_text(digits.as_slice()) }),
                digit_text(digits.as_slice()) + "\n",
            );
            emit(cli, &out)?;
        }
    }
    Ok(true)
}

fn digit_text(digits: &[u8]) -> String {
    digits
        .iter()
        .map(|&d| char::from_digit(u32::from(d), 36).unwrap_or('?'))
        .collect()
}

fn load(path: &Path) -> Result<DigitString, CliError> {
    Ok(nseq::load(path)?)
}

fn dyadic_ladder(len: u64) -> Vec<u64> {
    let mut w: Vec<u64> = std::iter::successors(Some(1024u64), |n| n.checked_mul(2))
        .take_while(|&n| n < len)
        .collect();
    w.push(len);
    w
}

fn analyze(a: &AnalyzeArgs) -> Result<Output, CliError> {
    if a.op == AnalyzeOp::LowEntropy {
        let r = count_low_entropy_blocks(a.m, a.order, a.c)?;
        let csv = format!(
            "m,n,c,count,rate\n{},{},{},{},{}\n",
            r.m, r.n, r.c, r.count, r.rate
        );
        let text = format!(
            "{} of 2^{} blocks have H_{} <= {} (log2(count)/m = {:.4})\n",
            r.count, r.m, r.n, r.c, r.rate
        );
        return Ok(Output::new(serde_json::to_value(r)?, text).with_csv(csv));
    }
    let path = a
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("--in is required for this op".into()))?;
    let seq = load(path)?;
    let len = a.len.unwrap_or(seq.len() as u64);
    let mut csv = String::new();
    let mut text = String::new();
    let json = match a.op {
        AnalyzeOp::Entropy => {
            let p = entropy_profile(&seq, &[len], 1..=a.m)?;
            csv.push_str("n,entropy\n");
            for row in &p.rows {
                writeln!(csv, "{},{}", row.n, row.entropy).ok();
                writeln!(text, "H_{} = {:.6}", row.n, row.entropy).ok();
            }
            serde_json::to_value(p)?
        }
        AnalyzeOp::Profile => {
            let windows = if a.windows.is_empty() {
                dyadic_ladder(len)
            } else {
                a.windows.clone()
            };
            let p = entropy_profile(&seq, &windows, 1..=a.m)?;
            csv.push_str("window,n,entropy\n");
            for row in &p.rows {
                writeln!(csv, "{},{},{}", row.window, row.n, row.entropy).ok();
            }
            for (n, lo, hi) in &p.extremes {
                writeln!(text, "H_{n}: min {lo:.6} max {hi:.6}").ok();
            }
            serde_json::to_value(p)?
        }
        AnalyzeOp::Complexity => {
            let r = complexity_curve(&seq, len, a.eps, 1..=a.m)?;
            csv.push_str("m,complexity,threshold\n");
            for row in &r.rows {
                writeln!(csv, "{},{},{}", row.m, row.complexity, row.threshold).ok();
                writeln!(
                    text,
                    "C({}, {}) = {} (2^(eps m) = {:.3})",
                    a.eps, row.m, row.complexity, row.threshold
                )
                .ok();
            }
            writeln!(
                text,
                "subexponential at tested scales: {}",
                r.subexponential
            )
            .ok();
            serde_json::to_value(r)?
        }
        AnalyzeOp::Goodness => {
            csv.push_str("m,goodness,ideal\n");
            let mut rows = Vec::new();
            for m in 1..=a.m {
                let g = eps_m_goodness(&seq, len, m)?;
                let ideal = (-(m as f64)).exp2();
                writeln!(csv, "{m},{g},{ideal}").ok();
                writeln!(text, "m={m}: max deviation {g:.6} from {ideal}").ok();
                rows.push(json!({ "m": m, "goodness": g, "ideal": ideal }));
            }
            Value::Array(rows)
        }
        AnalyzeOp::Switches => {
            csv.push_str("len,switches,density\n");
            let mut rows = Vec::new();
            for w in dyadic_ladder(len) {
                let f = switch_density(&seq, w)?;
                writeln!(csv, "{w},{},{}", f.count, f.as_f64()).ok();
                writeln!(text, "{w}: {} switches, density {:.6}", f.count, f.as_f64()).ok();
                rows.push(json!({ "len": w, "switches": f.count, "density": f.as_f64() }));
            }
            Value::Array(rows)
        }
        AnalyzeOp::LowEntropy => unreachable!("handled above"),
    };
    Ok(Output::new(json, text).with_csv(csv))
}

fn arith(cli: &Cli, a: &ArithArgs) -> Result<bool, CliError> {
    let arity = match a.op {
        ArithOp::Add | ArithOp::Mul => 2,
        _ => 1,
    };
    if a.inputs.len() != arity {
        return Err(CliError::Usage(format!(
            "{:?} takes {arity} input(s)",
            a.op
        )));
    }
    let seqs = a
        .inputs
        .iter()
        .map(|p| load(p))
        .collect::<Result<Vec<_>, _>>()?;
    let shortest = seqs.iter().map(DigitString::len).min().unwrap_or(0);
    let frac = match a.frac {
        Some(f) => f,
        None => shortest
            .checked_sub(a.guard)
            .filter(|&f| f > 0)
            .ok_or_else(|| CliError::Usage(format!("inputs need more than {} digits", a.guard)))?,
    };
    let numbers = seqs
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if s.alphabet() != Alphabet::BINARY {
                return Err(CliError::Usage("arithmetic needs binary inputs".into()));
            }
            let integer = a.integers.get(i).copied().unwrap_or(0);
            // A stored file is read as an exact finite fraction.
            let x = FixedPointNumber::from_digits(false, integer, s.as_slice(), frac, a.guard)?;
            Ok(x)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let result = match a.op {
        ArithOp::Add => carry_add(&numbers[0], &numbers[1]),
        ArithOp::Mul => mul(&numbers[0], &numbers[1], frac)?,
        ArithOp::Mulq => mul_rational(&numbers[0], a.p, a.q, frac)?,
        ArithOp::Neg => neg(&numbers[0])?,
        ArithOp::Shiftsum => {
            let set: Box<dyn IndexSet> = if a.shifts.trim() == "fs" {
                Box::new(FiniteSums)
            } else {
                let list = a
                    .shifts
                    .split(',')
                    .map(|s| s.trim().parse::<u64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| CliError::Usage(format!("bad shift list {:?}", a.shifts)))?;
                Box::new(FiniteSet::new(list))
            };
            shifted_sum(&seqs[0], set.as_ref(), frac, a.guard)?
        }
    };
    let certified = result.certified_digits();
    let sidecar = json!({
        "op": format!("{:?}", a.op).to_lowercase(),
        "certified_digits": certified,
        "error_bound_log2": result.error_bound_log2(),
        "integer_part": result.integer_part().to_string(),
        "negative": result.is_negative(),
        "frac_digits": frac,
        "guard_digits": a.guard,
    });
    let digits = DigitString::binary(result.fraction_digits(frac))?;
    match &cli.out {
        Some(path) => {
            nseq::save(path, &digits)?;
            let mut side = path.clone().into_os_string();
            side.push(".json");
            std::fs::write(
                PathBuf::from(side),
                serde_json::to_string_pretty(&sidecar)? + "\n",
            )?;
        }
        None => {
            let mut json = sidecar.clone();
            json["digits"] = Value::String(digit_text(digits.as_slice()));
            let text = format!(
                "{}{}.{}\ncertified digits: {certified}\nerror bound: 2^{:.2}\n",
                if result.is_negative() { "-" } else { "" },
                result.integer_part(),
                digit_text(digits.as_slice()),
                result.error_bound_log2()
            );
            emit(cli, &Output::new(json, text))?;
        }
    }
    Ok(true)
}

fn pnormal(cli: &Cli, a: &PnormalArgs) -> Result<Output, CliError> {
    let p = parse_rational(&a.p)?;
    let stats = CarrySumStats::new(&p)?;
    let mc = match a.mc {
        Some(n) => {
            let pf = p
                .to_f64()
                .ok_or_else(|| CliError::Usage("p out of range".into()))?;
            Some(monte_carlo_carry_sum(pf, cli.seed, n)?)
        }
        None => None,
    };
    let mut json = serde_json::to_value(&stats)?;
    json["mc_stats"] = serde_json::to_value(&mc)?;
    let mut text = format!(
        "p = {}\nP = {} ({:.6})\nQ = {} ({:.6})\np' = {} ({:.6})\nQ0 = {} ({:.6})\nP0 = {} ({:.6})\np'0 = {} ({:.6})\nl = {}\n",
        stats.p,
        stats.big_p, stats.big_p.approx(),
        stats.big_q, stats.big_q.approx(),
        stats.pprime, stats.pprime.approx(),
        stats.q0, stats.q0.approx(),
        stats.p0, stats.p0.approx(),
        stats.pprime0, stats.pprime0.approx(),
        stats.l.map_or_else(|| "undefined for p <= 1/2".to_string(), |l| l.to_string()),
    );
    if let Some(mc) = &mc {
        writeln!(
            text,
            "simulated: freq(1) = {:.6}, freq(1 | next 0) = {:.6}, correlation = {:.6}, ambiguous = {}",
            mc.freq_one, mc.freq_one_given_next_zero, mc.neighbour_correlation, mc.ambiguous
        )
        .ok();
    }
    Ok(Output::new(json, text))
}

fn algsys(cli: &Cli, op: &AlgsysOp) -> Result<bool, CliError> {
    let write_digits = |digits: DigitString| -> Result<bool, CliError> {
        match &cli.out {
            Some(path) => nseq::save(path, &digits)?,
            None => {
                let text = digit_text(digits.as_slice());
                emit(cli, &Output::new(json!({ "digits": text }), text + "\n"))?;
            }
        }
        Ok(true)
    };
    match op {
        AlgsysOp::ModpAdd { inputs } => {
            let a: SeqRef = Arc::new(load(&inputs[0])?);
            let b: SeqRef = Arc::new(load(&inputs[1])?);
            let sum = modp_add(a, b)?;
            let n = sum.horizon().finite().unwrap_or(0);
            write_digits(DigitString::from_sequence(&sum, n)?)
        }
        AlgsysOp::Ca { input, coeffs, n } => {
            let coeffs: Vec<i64> = serde_json::from_str(coeffs)?;
            let seq = load(input)?;
            let ca = LinearCA::new(seq.alphabet().size(), coeffs)?;
            let n = n.unwrap_or((seq.len() as u64).saturating_sub(ca.reach()));
            write_digits(apply_ca(&ca, &seq, n)?)
        }
        AlgsysOp::Orbit {
            matrix,
            x0,
            precision,
            steps,
            grid_bits,
        } => {
            let map = ToralMap::new(serde_json::from_str(matrix)?)?;
            let start = match x0 {
                Some(text) => {
                    let coords: Vec<String> = serde_json::from_str(text)?;
                    OrbitStart::Rational(
                        coords
                            .iter()
                            .map(|c| parse_rational(c))
                            .collect::<Result<_, _>>()?,
                    )
                }
                None => OrbitStart::random(map.dim(), *precision, cli.seed),
            };
            let orbit = toral_orbit(&map, &start, *steps, *grid_bits)?;
            let mut csv = String::from("step");
            for i in 0..map.dim() {
                write!(csv, ",x{i}").ok();
            }
            csv.push('\n');
            for (t, p) in orbit.points.iter().enumerate() {
                write!(csv, "{t}").ok();
                for c in p {
                    write!(csv, ",{c}").ok();
                }
                csv.push('\n');
            }
            let text = format!(
                "steps: {}\ngrid cells per axis: {}\ndiscrepancy: {:.6}\ncertified steps: {}\nergodic: {}\n",
                orbit.steps,
                1u64 << grid_bits,
                orbit.discrepancy,
                orbit.certified_steps,
                orbit.ergodic
            );
            let mut json = serde_json::to_value(&orbit)?;
            json["determinant"] = Value::String(map.determinant().to_string());
            emit(cli, &Output::new(json, text).with_csv(csv))?;
            Ok(true)
        }
    }
}

fn gray(a: &GrayArgs) -> Result<Output, CliError> {
    let start = Block::binary(&a.start)?;
    let n = start.len();
    let variant = if a.alternated {
        Variant::Alternated
    } else {
        Variant::Plain
    };
    if a.verify {
        let r = verify_ordering(n, &start, variant)?;
        let text = format!(
            "n={n} {variant:?}: bijective {} single flips {} nested suffixes {}\n",
            r.bijective, r.single_flips, r.nested_suffixes
        );
        let mut out = Output::new(serde_json::to_value(&r)?, text);
        out.passed = r.passed();
        return Ok(out);
    }
    let ordering = GrayOrdering::new(start, variant)?;
    let limit = a.limit.unwrap_or(u64::MAX);
    let blocks: Vec<String> = ordering
        .iter()
        .take(limit.min(1 << 20) as usize)
        .map(|b| b.to_string())
        .collect();
    let text = blocks.join("\n") + "\n";
    let csv = std::iter::once("index,block".to_string())
        .chain(
            blocks
                .iter()
                .enumerate()
                .map(|(i, b)| format!("{},{b}", i + 1)),
        )
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    Ok(Output::new(json!({ "n": n, "blocks": blocks }), text).with_csv(csv))
}

fn load_manifest(path: Option<&PathBuf>) -> Result<Manifest, CliError> {
    match path {
        Some(p) => Manifest::parse(&std::fs::read_to_string(p)?),
        None => Ok(Manifest::builtin()),
    }
}

fn report_output(reports: Vec<ExperimentReport>) -> Result<Output, CliError> {
    let passed = reports.iter().all(|r| r.passed && r.within_budget);
    let text: String = reports.iter().map(ExperimentReport::to_text).collect();
    let mut csv = String::from("experiment,criterion,passed,within_budget,runtime_s,budget_s\n");
    for r in &reports {
        writeln!(
            csv,
            "{},{},{},{},{},{}",
            r.experiment,
            r.criterion.map_or(String::new(), |c| c.to_string()),
            r.passed,
            r.within_budget,
            r.runtime_s,
            r.budget_s
        )
        .ok();
    }
    let mut out = Output::new(serde_json::to_value(&reports)?, text).with_csv(csv);
    out.passed = passed;
    Ok(out)
}

fn verify(a: &VerifyArgs) -> Result<Output, CliError> {
    let manifest = load_manifest(a.manifest.as_ref())?;
    if !a.all && a.criterion.is_empty() {
        return Err(CliError::Usage("pass --all or --criterion".into()));
    }
    let selected: Vec<&str> = names()
        .filter(|name| {
            a.all
                || manifest
                    .experiments
                    .get(*name)
                    .and_then(|s| s.criterion)
                    .is_some_and(|c| a.criterion.contains(&c))
        })
        .collect();
    if selected.is_empty() {
        return Err(CliError::Usage("no experiment matches".into()));
    }
    // Sequential so that each wall-clock budget is measured on its own.
    let reports = selected
        .into_iter()
        .map(|name| run_experiment(&manifest, name, &[]))
        .collect::<Result<Vec<_>, _>>()?;
    report_output(reports)
}

fn experiment(a: &ExperimentArgs) -> Result<Output, CliError> {
    let manifest = load_manifest(a.manifest.as_ref())?;
    let report = run_experiment(&manifest, &a.name, &a.overrides)?;
    let mut out = report_output(vec![report.clone()])?;
    out.json = serde_json::to_value(&report)?;
    Ok(out)
}
