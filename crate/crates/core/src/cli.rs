//! Command-line front end.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::experiments::{
    boundedness_sweep, divergence_probe, refinement_study, run_suite, CorpusFamily, CorpusSpec,
    OperatorChoice,
};
use crate::exponents::{check, region_boundary, ExponentParams, FreeAxis, TheoremId};
use crate::grid::{write_csv, GridParams};
use crate::norms::{
    dyadic_radii, herz_morrey_norm, herz_norm, mixed_lebesgue_norm, mixed_morrey_norm,
    weighted_mixed_norm, ExponentVector, HerzMorreyParams,
};

/// Exit code for malformed arguments or configuration.
pub const EXIT_USAGE: i32 = 1;
/// Exit code for failures during computation.
pub const EXIT_COMPUTE: i32 = 2;
/// Exit code when the invariant suite reports a violation.
pub const EXIT_SUITE: i32 = 3;

/// Environment variable fixing the worker thread count.
pub const THREADS_ENV: &str = "HERZMORREY_THREADS";

#[derive(Parser, Debug)]
#[command(name = "herzmorrey", version, args_override_self = true)]
#[command(about = "Norms, operators and exponent checks for mixed Herz-Morrey spaces")]
struct Cli {
    /// TOML file whose keys mirror the long flags; flags given on the
    /// command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one norm of a corpus function.
    Norm(NormArgs),
    /// Apply an operator to a corpus function and write the result as CSV.
    Apply(ApplyArgs),
    /// Check the hypotheses of a theorem and print the verdict as JSON.
    Check(CheckArgs),
    /// Admissible region in a two-parameter slice, written as CSV polygons.
    Region(RegionArgs),
    /// Boundedness sweep of an operator over the corpus.
    Sweep(SweepArgs),
    /// Divergence probe for parameters failing one hypothesis.
    Probe(ProbeArgs),
    /// Run every invariant suite.
    Suite(SuiteArgs),
}

#[derive(Args, Debug, Clone)]
struct GridArgs {
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = -3, allow_hyphen_values = true)]
    k_min: i32,
    #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
    k_max: i32,
    #[arg(long, default_value_t = 16)]
    spo: usize,
}

impl GridArgs {
    fn params(&self) -> GridParams {
        GridParams::new(self.n, self.k_min, self.k_max, self.spo)
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum NormKind {
    Lebesgue,
    Weighted,
    Morrey,
    Herz,
    HerzMorrey,
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(long, value_enum)]
    kind: NormKind,
    /// Corpus id such as `annulus:0`, `gaussian:0.5` or `random:7`.
    #[arg(long)]
    f: String,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    /// One value repeated over all axes, or a comma list of length n.
    #[arg(long, value_delimiter = ',', default_value = "2")]
    q: Vec<f64>,
    /// Per-axis weight exponents of the weighted norm.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    alphas: Vec<f64>,
}

#[derive(Args, Debug)]
struct ApplyArgs {
    /// `hl`, `fractional:<l>`, `riesz:<l>`, `mb` or `mbl:<l>`.
    #[arg(long)]
    op: String,
    #[arg(long)]
    f: String,
    #[command(flatten)]
    grid: GridArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ExponentArgs {
    #[arg(long)]
    theorem: String,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Only read by the same-space theorems.
    #[arg(long, default_value_t = 1.0)]
    p: f64,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    q1: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    q2: Vec<f64>,
    #[arg(long)]
    l: Option<f64>,
}

fn expand(q: &[f64], n: usize) -> Option<Vec<f64>> {
    match q.len() {
        0 => None,
        1 => Some(vec![q[0]; n]),
        _ => Some(q.to_vec()),
    }
}

impl ExponentArgs {
    fn theorem(&self) -> Result<TheoremId> {
        self.theorem.parse()
    }

    fn params(&self) -> ExponentParams {
        ExponentParams {
            n: self.n,
            alpha: self.alpha,
            p: Some(self.p),
            p1: self.p1,
            p2: self.p2,
            lambda: self.lambda,
            q: expand(&self.q, self.n),
            q1: expand(&self.q1, self.n),
            q2: expand(&self.q2, self.n),
            l: self.l,
        }
    }
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[command(flatten)]
    exp: ExponentArgs,
}

#[derive(Args, Debug)]
struct RegionArgs {
    #[command(flatten)]
    exp: ExponentArgs,
    /// Two free axes, e.g. `alpha,lambda`.
    #[arg(long, value_delimiter = ',', default_value = "alpha,lambda")]
    axes: Vec<String>,
    /// `u_lo,u_hi,v_lo,v_hi`
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-2,2,0,1"
    )]
    window: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long)]
    op: String,
    #[arg(long)]
    theorem: String,
    #[command(flatten)]
    grid: GridArgs,
    /// Comma list; one sweep point per (alpha, lambda) pair.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        required = true
    )]
    alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    lambda: Vec<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    q: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    q1: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    q2: Vec<f64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of random step functions in the corpus.
    #[arg(long, default_value_t = 20)]
    random: usize,
    /// Also run at twice the resolution and report the change.
    #[arg(long)]
    refine: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    #[arg(long)]
    op: String,
    #[command(flatten)]
    exp: ExponentArgs,
    /// k-ranges as `lo:hi`, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-3:3,-6:6"
    )]
    ranges: Vec<String>,
    #[arg(long, default_value_t = 16)]
    spo: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SuiteArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Results go to `out`, errors to `err`.
pub fn run_cli(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    init_threads();
    let args = match merge_config(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{e}")
            } else {
                write!(out, "{e}")
            };
            return code;
        }
    };
    match run(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Parse(_)
                | Error::MissingParameter(_)
                | Error::InvalidParameter(_)
                | Error::InvalidExponent(_)
                | Error::InvalidOrder(_)
                | Error::OperatorTheoremMismatch { .. }
                | Error::CouplingMismatch(_)
                | Error::InvalidProbe(_)
                | Error::DimensionMismatch { .. } => EXIT_USAGE,
                _ => EXIT_COMPUTE,
            }
        }
    }
}

fn init_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        // a second call within one process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

/// Splices `--key value` pairs from the `--config` file in front of the
/// command-line flags. Keys of a table named after the subcommand apply to
/// that subcommand only.
fn merge_config(args: Vec<String>) -> Result<Vec<String>> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            path = Some(it.next().ok_or(Error::MissingParameter("config"))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = std::fs::read_to_string(&path)?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Parse(format!("{path}: {e}")))?;
    let sub_pos = rest
        .iter()
        .skip(1)
        .position(|a| !a.starts_with('-'))
        .map(|i| i + 1);
    let Some(sub_pos) = sub_pos else {
        return Ok(rest);
    };
    let sub = rest[sub_pos].clone();
    let mut flags = Vec::new();
    for (key, value) in &table {
        if let toml::Value::Table(t) = value {
            if *key == sub {
                for (k, v) in t {
                    push_flag(&mut flags, k, v)?;
                }
            }
        } else {
            push_flag(&mut flags, key, value)?;
        }
    }
    let mut merged = rest[..=sub_pos].to_vec();
    merged.extend(flags);
    merged.extend(rest[sub_pos + 1..].iter().cloned());
    Ok(merged)
}

fn push_flag(flags: &mut Vec<String>, key: &str, value: &toml::Value) -> Result<()> {
    let flag = format!("--{}", key.replace('_', "-"));
    let scalar = |v: &toml::Value| -> Result<String> {
        match v {
            toml::Value::String(s) => Ok(s.clone()),
            toml::Value::Integer(i) => Ok(i.to_string()),
            toml::Value::Float(f) => Ok(f.to_string()),
            _ => Err(Error::Parse(format!("unsupported value for `{key}`"))),
        }
    };
    match value {
        toml::Value::Boolean(true) => flags.push(flag),
        toml::Value::Boolean(false) => {}
        toml::Value::Array(items) => {
            let parts = items.iter().map(scalar).collect::<Result<Vec<_>>>()?;
            flags.push(format!("{flag}={}", parts.join(",")));
        }
        v => flags.push(format!("{flag}={}", scalar(v)?)),
    }
    Ok(())
}

fn sink(
    path: &Option<PathBuf>,
    out: &mut dyn Write,
    f: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(Path::new(p))?);
            f(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => f(out),
    }
}

fn parse_ranges(ranges: &[String]) -> Result<Vec<(i32, i32)>> {
    ranges
        .iter()
        .map(|r| {
            let bad = || Error::Parse(format!("bad k-range `{r}`, expected lo:hi"));
            let (a, b) = r.split_once(':').ok_or_else(bad)?;
            Ok((
                a.trim().parse().map_err(|_| bad())?,
                b.trim().parse().map_err(|_| bad())?,
            ))
        })
        .collect()
}

fn run(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Norm(a) => {
            let grid = a.grid.params().build()?;
            let d = &grid.decomposition;
            let f = a.f.parse::<CorpusFamily>()?.generate(&grid)?;
            let q = ExponentVector::new(expand(&a.q, a.grid.n).unwrap_or_default())?;
            let v = match a.kind {
                NormKind::Lebesgue => mixed_lebesgue_norm(&f, &q)?,
                NormKind::Weighted => {
                    let alphas =
                        expand(&a.alphas, a.grid.n).unwrap_or_else(|| vec![a.alpha; a.grid.n]);
                    weighted_mixed_norm(&f, &q, &alphas)?
                }
                NormKind::Morrey => mixed_morrey_norm(&f, a.lambda, &q, &dyadic_radii(d))?,
                NormKind::Herz => herz_norm(&f, a.alpha, a.p, &q, d)?,
                NormKind::HerzMorrey => {
                    let params = HerzMorreyParams::over(a.alpha, a.p, a.lambda, q, d)?;
                    herz_morrey_norm(&f, &params, d)?
                }
            };
            writeln!(out, "{v:?}")?;
        }
        Command::Apply(a) => {
            let grid = a.grid.params().build()?;
            let f = a.f.parse::<CorpusFamily>()?.generate(&grid)?;
            let spec = a.op.parse::<OperatorChoice>()?.build(&grid)?;
            let tf = spec.apply(&f)?;
            sink(&a.out, out, |w| write_csv(&tf, w))?;
        }
        Command::Check(a) => {
            let verdict = check(a.exp.theorem()?, &a.exp.params())?;
            writeln!(out, "{}", verdict.to_json()?)?;
        }
        Command::Region(a) => {
            if a.axes.len() != 2 {
                return Err(Error::InvalidParameter("--axes needs two names".into()));
            }
            if a.window.len() != 4 {
                return Err(Error::InvalidParameter(
                    "--window needs four numbers".into(),
                ));
            }
            let axes = [
                a.axes[0].parse::<FreeAxis>()?,
                a.axes[1].parse::<FreeAxis>()?,
            ];
            let w = [[a.window[0], a.window[1]], [a.window[2], a.window[3]]];
            let region = region_boundary(a.exp.theorem()?, &a.exp.params(), axes, w)?;
            sink(&a.out, out, |w| region.write_csv(w))?;
        }
        Command::Sweep(a) => {
            let theorem: TheoremId = a.theorem.parse()?;
            let op: OperatorChoice = a.op.parse()?;
            let n = a.grid.n;
            let mut points = Vec::new();
            for &lambda in &a.lambda {
                for &alpha in &a.alpha {
                    points.push(ExponentParams {
                        n,
                        alpha: Some(alpha),
                        p: a.p,
                        p1: a.p1,
                        p2: a.p2,
                        lambda: Some(lambda),
                        q: expand(&a.q, n),
                        q1: expand(&a.q1, n),
                        q2: expand(&a.q2, n),
                        l: a.l,
                    });
                }
            }
            let corpus = CorpusSpec::standard(a.grid.params(), a.seed, a.random);
            if a.refine {
                let rows = refinement_study(op, theorem, &corpus, &points)?;
                sink(&a.out, out, |w| {
                    let mut c = csv::Writer::from_writer(w);
                    for r in &rows {
                        c.serialize(r)?;
                    }
                    c.flush()?;
                    Ok(())
                })?;
            } else {
                let report = boundedness_sweep(op, theorem, &corpus, &points)?;
                sink(&a.out, out, |w| report.write_csv(w))?;
                if let Some(p) = &a.summary {
                    report.write_summary_csv(BufWriter::new(File::create(p)?))?;
                }
            }
        }
        Command::Probe(a) => {
            let op: OperatorChoice = a.op.parse()?;
            let ranges = parse_ranges(&a.ranges)?;
            let report = divergence_probe(op, a.exp.theorem()?, &a.exp.params(), &ranges, a.spo)?;
            sink(&a.out, out, |w| report.write_csv(w))?;
            if a.out.is_some() {
                writeln!(out, "{}: {}", report.failed_clause, report.trend)?;
            }
        }
        Command::Suite(a) => {
            let report = run_suite(a.seed)?;
            sink(&a.out, out, |w| report.write_csv(w))?;
            if !report.passed() {
                return Ok(EXIT_SUITE);
            }
        }
    }
    Ok(0)
}
