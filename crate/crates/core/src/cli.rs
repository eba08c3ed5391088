//! Command-line front end: problem presets, input files, reports and logs.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::Parser;
use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use crate::config::{Algorithm, LevelConfig, PrecisionConfig};
use crate::constants::{self, AlgebraicSpec, SeriesKind, SeriesSpec};
use crate::error::{Error, Result};
use crate::kernel::Core;
use crate::multilevel::run_multilevel;
use crate::parallel::Executor;
use crate::precision::{bits_for_digits, format_sci, parse_decimal};
use crate::pslq::{IterRecord, LevelCount, Observer, RelationOutcome, Status};

/// Default degree of the `Z5` power vector.
pub const Z5_DEFAULT_DEGREE: u32 = 10;

/// Where the input vector comes from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Source {
    File(PathBuf),
    /// Powers of `3^(1/r) - 2^(1/s)` up to degree `r·s`.
    Algebraic(u32, u32),
    /// `(pi, S_1, ..., S_8)` with `S_j = sum 16^-k / (8k+j)`.
    Bbp16Pi,
    /// `(pi^2, S_1, ..., S_12)` with `S_j = sum 729^-k / (12k+j)^2`.
    Bbp3PiSquared,
    /// `(S(k), pi^k)` with `S(k) = sum 1/(n^k C(2n,n))`.
    Binom(u32),
    /// `(zeta(m), sum (±1)^(n-1)/(n^m C(2n,n)))`, alternating for odd `m`.
    ZetaBinom(u32),
    /// Powers of the third logistic-map bifurcation point up to degree 12.
    Bifurcation3,
    Z5Powers(u32),
}

impl Source {
    /// Digits used when `--digits` is not given.
    pub fn default_digits(&self) -> Option<u32> {
        Some(match self {
            Source::File(_) => return None,
            Source::Algebraic(r, s) => 9 * r * s + 10,
            Source::Bbp16Pi => 200,
            Source::Bbp3PiSquared => 300,
            Source::Binom(_) | Source::ZetaBinom(_) => 60,
            Source::Bifurcation3 => 250,
            Source::Z5Powers(_) => 220,
        })
    }
}

fn parse_u32(s: &str, what: &str) -> Result<u32> {
    s.trim().parse().map_err(|_| {
        Error::InvalidParameter(format!("{what}: expected a positive integer, got {s:?}"))
    })
}

impl FromStr for Source {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let need = |what: &str| {
            arg.ok_or_else(|| Error::InvalidParameter(format!("problem {name} needs {what}")))
        };
        let src = match name {
            "algebraic" => {
                let a = need("r,s")?;
                let (r, s) = a.split_once(',').ok_or_else(|| {
                    Error::InvalidParameter(format!("algebraic:{a}: expected r,s"))
                })?;
                let (r, s) = (parse_u32(r, "r")?, parse_u32(s, "s")?);
                if r < 1 || s < 1 || r * s < 2 {
                    return Err(Error::InvalidParameter(format!(
                        "algebraic:{a}: r·s must be at least 2"
                    )));
                }
                Source::Algebraic(r, s)
            }
            "bbp16pi" => Source::Bbp16Pi,
            "bbp3pi2" => Source::Bbp3PiSquared,
            "binom" => {
                let k = parse_u32(need("k")?, "k")?;
                if k < 2 {
                    return Err(Error::InvalidParameter("binom:k needs k >= 2".into()));
                }
                Source::Binom(k)
            }
            "zetabinom" => {
                let m = parse_u32(need("m")?, "m")?;
                if !(2..=4).contains(&m) {
                    return Err(Error::InvalidParameter(format!(
                        "zetabinom:{m}: m must be 2, 3 or 4"
                    )));
                }
                Source::ZetaBinom(m)
            }
            "bifurcation3" | "b3" => Source::Bifurcation3,
            "z5" => {
                let d = match arg {
                    Some(a) => parse_u32(a, "degree")?,
                    None => Z5_DEFAULT_DEGREE,
                };
                if d < 1 {
                    return Err(Error::InvalidParameter(
                        "z5 degree must be at least 1".into(),
                    ));
                }
                Source::Z5Powers(d)
            }
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "unknown problem {s:?} (expected algebraic:R,S, bbp16pi, bbp3pi2, \
                     binom:K, zetabinom:M, bifurcation3 or z5[:DEGREE])"
                )))
            }
        };
        if arg.is_some()
            && matches!(
                src,
                Source::Bbp16Pi | Source::Bbp3PiSquared | Source::Bifurcation3
            )
        {
            return Err(Error::InvalidParameter(format!(
                "problem {name} takes no argument"
            )));
        }
        Ok(src)
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::File(p) => write!(f, "file:{}", p.display()),
            Source::Algebraic(r, s) => write!(f, "algebraic:{r},{s}"),
            Source::Bbp16Pi => f.write_str("bbp16pi"),
            Source::Bbp3PiSquared => f.write_str("bbp3pi2"),
            Source::Binom(k) => write!(f, "binom:{k}"),
            Source::ZetaBinom(m) => write!(f, "zetabinom:{m}"),
            Source::Bifurcation3 => f.write_str("bifurcation3"),
            Source::Z5Powers(d) => write!(f, "z5:{d}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemSpec {
    pub source: Source,
    pub digits: u32,
}

fn bbp_vector(lead: Float, base: u32, modulus: u32, power: u32, digits: u32) -> Result<Vec<Float>> {
    let mut x = vec![lead];
    for offset in 1..=modulus {
        x.push(constants::eval_series(SeriesSpec {
            kind: SeriesKind::BbpTerm {
                base,
                modulus,
                offset,
                power,
            },
            digits,
        })?);
    }
    Ok(x)
}

/// Builds the input vector of a preset at `spec.digits`; file sources are
/// read back from disk.
pub fn build_vector(spec: &ProblemSpec) -> Result<Vec<Float>> {
    let d = spec.digits;
    match &spec.source {
        Source::File(path) => {
            let (x, file_digits) = load_input_file(path)?;
            if file_digits < d {
                return Err(Error::InvalidParameter(format!(
                    "{} carries {file_digits} digits, fewer than the requested {d}",
                    path.display()
                )));
            }
            Ok(x)
        }
        Source::Algebraic(r, s) => {
            let alpha = constants::gen_algebraic(AlgebraicSpec {
                r: *r,
                s: *s,
                digits: d,
            })?;
            constants::power_vector(&alpha, (r * s) as usize)
        }
        Source::Bbp16Pi => bbp_vector(constants::gen_pi(d)?, 16, 8, 1, d),
        Source::Bbp3PiSquared => {
            let pi = constants::gen_pi(d + constants::GUARD_DIGITS)?;
            let pi2 = Float::with_val(bits_for_digits(d), &pi * &pi);
            bbp_vector(pi2, 729, 12, 2, d)
        }
        Source::Binom(k) => {
            let s = constants::eval_series(SeriesSpec {
                kind: SeriesKind::CentralBinom {
                    k: *k,
                    alternating: false,
                },
                digits: d,
            })?;
            let pi = constants::gen_pi(d + constants::GUARD_DIGITS)?;
            let pik = Float::with_val(bits_for_digits(d), (&pi).pow(*k));
            Ok(vec![s, pik])
        }
        Source::ZetaBinom(m) => {
            let z = constants::eval_series(SeriesSpec {
                kind: SeriesKind::Zeta(*m),
                digits: d,
            })?;
            let s = constants::eval_series(SeriesSpec {
                kind: SeriesKind::CentralBinom {
                    k: *m,
                    alternating: m % 2 == 1,
                },
                digits: d,
            })?;
            Ok(vec![z, s])
        }
        Source::Bifurcation3 => {
            let b3 = constants::gen_b3(d)?;
            constants::power_vector(&b3, constants::B3_COEFFICIENTS.len() - 1)
        }
        Source::Z5Powers(deg) => {
            let z5 = constants::gen_z5(d)?;
            constants::power_vector(&z5, *deg as usize)
        }
    }
}

/// Significant decimal digits in a numeric literal: leading zeros, sign,
/// point and exponent are not counted.
fn significant_digits(s: &str) -> usize {
    let mantissa = s.split(['e', 'E']).next().unwrap_or("");
    mantissa
        .chars()
        .filter(|c| c.is_ascii_digit())
        .skip_while(|&c| c == '0')
        .count()
}

fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

/// Reads a `digits: N` header followed by one decimal constant per line.
pub fn load_input_file(path: &Path) -> Result<(Vec<Float>, u32)> {
    let text = std::fs::read_to_string(path)?;
    let input_err = |line: usize, msg: String| Error::Input {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut digits: Option<u32> = None;
    let mut x = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let Some(d) = digits else {
            let value = line
                .strip_prefix("digits:")
                .ok_or_else(|| input_err(line_no, "expected header `digits: N`".into()))?;
            let d: u32 = value
                .trim()
                .parse()
                .map_err(|_| input_err(line_no, format!("bad digit count {:?}", value.trim())))?;
            if d < 32 {
                return Err(input_err(
                    line_no,
                    format!("digits must be at least 32, got {d}"),
                ));
            }
            digits = Some(d);
            continue;
        };
        let sig = significant_digits(line);
        if sig < d as usize {
            return Err(input_err(
                line_no,
                format!("constant has {sig} significant digits, header requires {d}"),
            ));
        }
        let v = parse_decimal(line, d).map_err(|e| input_err(line_no, e.to_string()))?;
        x.push(v);
    }
    let d = digits.ok_or_else(|| input_err(1, "missing header `digits: N`".into()))?;
    if x.len() < 2 {
        return Err(input_err(
            text.lines().count().max(1),
            format!("need at least 2 constants, found {}", x.len()),
        ));
    }
    Ok((x, d))
}

/// Writes `x` in the format read by [`load_input_file`].
pub fn write_input_file(path: &Path, x: &[Float], digits: u32) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "digits: {digits}")?;
    for v in x {
        // two extra digits so no constant falls short after rounding
        writeln!(out, "{}", v.to_string_radix(10, Some(digits as usize + 2)))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct OutputOptions {
    pub json: Option<PathBuf>,
    pub log: Option<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub problem: ProblemSpec,
    pub algo: Algorithm,
    pub precision: PrecisionConfig,
    pub levels: LevelConfig,
    /// `None` defers to `PSLQ_THREADS`.
    pub threads: Option<usize>,
    pub output: OutputOptions,
}

#[derive(Parser, Debug)]
#[command(
    name = "pslq",
    version,
    about = "Integer relation detection with PSLQ and multi-pair PSLQ"
)]
struct Args {
    /// Preset: algebraic:R,S | bbp16pi | bbp3pi2 | binom:K | zetabinom:M | bifurcation3 | z5[:DEGREE]
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    problem: Option<String>,
    /// File with a `digits: N` header and one constant per line
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "multipair", value_parser = ["pslq", "multipair", "multi-pair"])]
    algo: String,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    levels: u8,
    /// Working precision in decimal digits
    #[arg(long)]
    digits: Option<u32>,
    /// Pivot weight, at least sqrt(4/3)
    #[arg(long)]
    gamma: Option<String>,
    /// Multi-pair fraction of disjoint pairs per iteration
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    max_iters: Option<u64>,
    /// Worker threads (default: PSLQ_THREADS or 1)
    #[arg(long)]
    threads: Option<usize>,
    /// Write the machine-readable report here
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write a tab-separated per-iteration log here
    #[arg(long)]
    log: Option<PathBuf>,
}

/// Failure to produce a [`RunConfig`] from the command line.
#[derive(Debug)]
pub enum ArgsError {
    /// `--help` or `--version`; the text is meant for stdout.
    Info(String),
    Usage(String),
}

impl From<Error> for ArgsError {
    fn from(e: Error) -> Self {
        ArgsError::Usage(e.to_string())
    }
}

pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, ArgsError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            ArgsError::Info(e.to_string())
        }
        _ => ArgsError::Usage(e.to_string()),
    })?;
    let source = match (&args.problem, &args.input) {
        (Some(p), None) => p.parse::<Source>()?,
        (None, Some(path)) => Source::File(path.clone()),
        _ => {
            return Err(ArgsError::Usage(
                "give exactly one of --problem and --input".into(),
            ))
        }
    };
    let digits = match (args.digits, &source) {
        (Some(d), _) => d,
        (None, Source::File(path)) => load_input_file(path)?.1,
        (None, src) => src.default_digits().unwrap_or(100),
    };
    let mut precision = PrecisionConfig::new(digits)?;
    precision.gamma = args.gamma.clone();
    crate::pslq::check_gamma(&precision.gamma_value()?)?;
    if let Some(beta) = args.beta {
        crate::multipair::check_beta(beta)?;
        precision.beta = beta;
    }
    if let Some(m) = args.max_iters {
        if m == 0 {
            return Err(ArgsError::Usage("--max-iters must be at least 1".into()));
        }
        precision.max_iters = m;
    }
    if args.threads == Some(0) {
        return Err(ArgsError::Usage("--threads must be at least 1".into()));
    }
    let mut levels = args.levels;
    let intermediate = LevelConfig::new(3)?.intermediate_digits;
    if levels == 3 && digits <= intermediate {
        // an intermediate tier needs more digits than it has itself
        levels = 2;
    }
    let level_cfg = LevelConfig::new(levels)?;
    level_cfg.validate(digits)?;
    Ok(RunConfig {
        problem: ProblemSpec { source, digits },
        algo: args.algo.parse()?,
        precision,
        levels: level_cfg,
        threads: args.threads,
        output: OutputOptions {
            json: args.json,
            log: args.log,
        },
    })
}

/// Machine-readable summary of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub status: Status,
    pub coefficients: Option<Vec<String>>,
    pub norm_bound: String,
    pub confidence: Option<String>,
    pub iterations: u64,
    pub digits_used: u32,
    pub levels: Vec<LevelCount>,
    pub elapsed_seconds: f64,
}

impl RunReport {
    pub fn new(outcome: &RelationOutcome, digits: u32, elapsed_seconds: f64) -> Self {
        RunReport {
            status: outcome.status,
            coefficients: outcome
                .coefficients
                .as_ref()
                .map(|c| c.iter().map(Integer::to_string).collect()),
            norm_bound: format_sci(&outcome.norm_bound, 10),
            confidence: outcome.confidence.as_ref().map(|c| format_sci(c, 6)),
            iterations: outcome.iterations,
            digits_used: digits,
            levels: outcome.levels.clone(),
            elapsed_seconds,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Exit status for a finished run.
pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Found => 0,
        Status::PrecisionExhausted => 2,
        Status::IterationLimit => 3,
    }
}

pub const LOG_HEADER: &str = "iter\tlevel\tmin_y_exp\tmax_y_exp\tbound\tpairs";

/// Observer writing one tab-separated line per iteration; the first write
/// error is kept and later records are dropped.
struct TsvLog<W: Write> {
    out: W,
    error: Option<std::io::Error>,
}

impl<W: Write> Observer for TsvLog<W> {
    fn on_iteration(&mut self, r: &IterRecord) {
        if self.error.is_some() {
            return;
        }
        if let Err(e) = writeln!(
            self.out,
            "{}\t{}\t{:.3}\t{:.3}\t{:.6e}\t{}",
            r.iter, r.level, r.min_y_exp, r.max_y_exp, r.bound, r.pairs
        ) {
            self.error = Some(e);
        }
    }

    fn on_flush(&mut self, _: &'static str, _: &Core<Float, Integer>) {}
}

/// `log10(|a·x| / max|x_i|)` computed at the precision of `x`.
pub fn relative_residual_log10(a: &[Integer], x: &[Float]) -> f64 {
    let prec = x.iter().map(Float::prec).max().unwrap_or(64);
    let mut dot = Float::new(prec);
    let mut scale = Float::new(prec);
    for (c, v) in a.iter().zip(x) {
        dot += Float::with_val(prec, c * v);
        let av = Float::with_val(prec, v.abs_ref());
        if av > scale {
            scale = av;
        }
    }
    if dot.is_zero() {
        return f64::NEG_INFINITY;
    }
    let r = Float::with_val(prec, dot.abs() / scale);
    crate::precision::Real::log10_abs(&r)
}

/// Result of [`execute`].
#[derive(Clone, Debug)]
pub struct Execution {
    pub outcome: RelationOutcome,
    pub report: RunReport,
    /// Residual of the reported relation against the input regenerated with
    /// 20 extra digits (file inputs are reused as read).
    pub residual_log10: Option<f64>,
}

/// Builds the input, runs the search and writes the requested log.
pub fn execute(cfg: &RunConfig) -> Result<Execution> {
    let x = build_vector(&cfg.problem)?;
    let exec = match cfg.threads {
        Some(t) => Executor::new(t)?,
        None => Executor::from_env()?,
    };
    let start = Instant::now();
    let outcome = match &cfg.output.log {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path)?);
            writeln!(out, "{LOG_HEADER}")?;
            let mut log = TsvLog { out, error: None };
            let outcome =
                run_multilevel(&x, cfg.algo, &cfg.precision, &cfg.levels, exec, &mut log)?;
            if let Some(e) = log.error {
                return Err(e.into());
            }
            log.out.flush()?;
            outcome
        }
        None => run_multilevel(
            &x,
            cfg.algo,
            &cfg.precision,
            &cfg.levels,
            exec,
            &mut crate::pslq::Silent,
        )?,
    };
    let elapsed = start.elapsed().as_secs_f64();
    let residual_log10 = match &outcome.coefficients {
        Some(a) => {
            let check = match cfg.problem.source {
                Source::File(_) => x,
                _ => build_vector(&ProblemSpec {
                    source: cfg.problem.source.clone(),
                    digits: cfg.problem.digits + 20,
                })?,
            };
            Some(relative_residual_log10(a, &check))
        }
        None => None,
    };
    let report = RunReport::new(&outcome, cfg.problem.digits, elapsed);
    Ok(Execution {
        outcome,
        report,
        residual_log10,
    })
}

/// Prints the console summary and writes the JSON report when requested.
pub fn emit_report(exec: &Execution, cfg: &RunConfig, console: &mut dyn Write) -> Result<()> {
    let r = &exec.report;
    writeln!(console, "problem:     {}", cfg.problem.source)?;
    writeln!(
        console,
        "algorithm:   {} ({} level{}, {} digits)",
        cfg.algo,
        cfg.levels.levels,
        if cfg.levels.levels == 1 { "" } else { "s" },
        r.digits_used
    )?;
    writeln!(console, "status:      {}", r.status.as_str())?;
    if let Some(c) = &r.coefficients {
        writeln!(console, "relation:    {}", c.join(" "))?;
    }
    writeln!(console, "norm bound:  {}", r.norm_bound)?;
    if let Some(c) = &r.confidence {
        writeln!(console, "confidence:  {c}")?;
    }
    match exec.residual_log10 {
        Some(res) if res.is_finite() => writeln!(console, "residual:    1e{res:.1}")?,
        Some(_) => writeln!(console, "residual:    0")?,
        None => {}
    }
    writeln!(console, "iterations:  {}", r.iterations)?;
    for l in &r.levels {
        writeln!(
            console,
            "  {:<13}{} iterations, {} flushes",
            l.level, l.iterations, l.flushes
        )?;
    }
    writeln!(console, "elapsed:     {:.3} s", r.elapsed_seconds)?;
    if let Some(path) = &cfg.output.json {
        std::fs::write(path, r.to_json() + "\n")?;
    }
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn main_with_args<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(c) => c,
        Err(ArgsError::Info(text)) => {
            let _ = write!(stdout, "{text}");
            return 0;
        }
        Err(ArgsError::Usage(msg)) => {
            let _ = writeln!(stderr, "{}", msg.trim_end());
            return 1;
        }
    };
    let result = execute(&cfg).and_then(|e| emit_report(&e, &cfg, stdout).map(|_| e));
    match result {
        Ok(e) => exit_code(e.report.status),
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_parsing() {
        assert_eq!(
            "algebraic:5,5".parse::<Source>().unwrap(),
            Source::Algebraic(5, 5)
        );
        assert_eq!("z5".parse::<Source>().unwrap(), Source::Z5Powers(10));
        assert_eq!("z5:6".parse::<Source>().unwrap(), Source::Z5Powers(6));
        assert_eq!(
            "zetabinom:3".parse::<Source>().unwrap(),
            Source::ZetaBinom(3)
        );
        assert!("zetabinom:5".parse::<Source>().is_err());
        assert!("algebraic:5".parse::<Source>().is_err());
        assert!("bbp16pi:2".parse::<Source>().is_err());
        assert!("lll".parse::<Source>().is_err());
        for s in [
            "algebraic:2,3",
            "bbp16pi",
            "bbp3pi2",
            "binom:4",
            "bifurcation3",
            "z5:10",
        ] {
            assert_eq!(s.parse::<Source>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn significant_digit_count() {
        assert_eq!(significant_digits("3.14159"), 6);
        assert_eq!(significant_digits("-0.00120"), 3);
        assert_eq!(significant_digits("1.5e-10"), 2);
        assert_eq!(significant_digits("0"), 0);
    }

    #[test]
    fn argument_defaults_and_conflicts() {
        let cfg = parse_args([
            "pslq",
            "--problem",
            "algebraic:5,5",
            "--digits",
            "190",
            "--levels",
            "2",
        ])
        .unwrap();
        assert_eq!(cfg.problem.source, Source::Algebraic(5, 5));
        assert_eq!(cfg.levels.levels, 2);
        assert_eq!(cfg.algo, Algorithm::MultiPair);
        assert_eq!(cfg.precision.beta, 0.4);
        let cfg = parse_args(["pslq", "--problem", "bbp16pi"]).unwrap();
        assert_eq!(cfg.problem.digits, 200);
        assert_eq!(cfg.levels.levels, 3);
        // too few digits for an intermediate tier
        let cfg = parse_args(["pslq", "--problem", "binom:4"]).unwrap();
        assert_eq!(cfg.levels.levels, 2);
        assert!(matches!(
            parse_args(["pslq", "--problem", "bbp16pi", "--input", "x.txt"]),
            Err(ArgsError::Usage(_))
        ));
        assert!(matches!(parse_args(["pslq"]), Err(ArgsError::Usage(_))));
        assert!(matches!(
            parse_args(["pslq", "--problem", "bbp16pi", "--levels", "4"]),
            Err(ArgsError::Usage(_))
        ));
        assert!(matches!(
            parse_args(["pslq", "--problem", "bbp16pi", "--gamma", "1.0"]),
            Err(ArgsError::Usage(_))
        ));
        assert!(matches!(
            parse_args(["pslq", "--help"]),
            Err(ArgsError::Info(_))
        ));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(Status::Found), 0);
        assert_eq!(exit_code(Status::PrecisionExhausted), 2);
        assert_eq!(exit_code(Status::IterationLimit), 3);
    }
}
