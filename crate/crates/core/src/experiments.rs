//! Test-function corpus, boundedness sweeps, refinement studies, divergence
//! probes and the invariant suites.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{check, region_boundary, ExponentParams, Family, FreeAxis, TheoremId};
use crate::grid::{euclidean_norm, pow2, restrict, DyadicGrid, GridFunction, GridParams};
use crate::norms::{
    annulus_norms, herz_morrey_from_annuli, herz_morrey_norm, herz_norm, mixed_lebesgue_norm,
    quasi_triangle_constant, quasi_triangle_defect, scalar_lebesgue_norm, weighted_mixed_norm,
    ExponentVector, HerzMorreyParams,
};
use crate::operators::{BmoSymbol, OperatorKind, OperatorSpec, RadiusSet};

/// Version tag written at the top of every CSV report.
pub const SCHEMA_VERSION: &str = "1";

/// Probability that a random dyadic piece is zero.
const RANDOM_ZERO_PROB: f64 = 0.3;

/// One member of the test-function corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CorpusFamily {
    /// `χ_{A_j}`
    Annulus(i32),
    /// `Σ_{j1 <= j <= j2} χ_{A_j}`
    AnnulusSum(i32, i32),
    /// `|x|^(-beta) χ_{|x| < cutoff}`
    PowerTail {
        beta: f64,
        cutoff: f64,
    },
    /// `exp(-|x|^2 / (2 sigma^2))`
    Gaussian(f64),
    /// Random non-negative step function, constant on each half-octave of
    /// every annulus and each orthant.
    RandomDyadic(u64),
    Zero,
}

impl CorpusFamily {
    /// Every generated function is restricted to the annuli of `grid`.
    pub fn generate(&self, grid: &DyadicGrid) -> Result<GridFunction> {
        let d = &grid.decomposition;
        let f = match *self {
            Self::Annulus(j) => grid.annulus_indicator(j),
            Self::AnnulusSum(j1, j2) => {
                let (lo, hi) = (j1.min(j2), j1.max(j2));
                grid.sample(|x| {
                    let r = euclidean_norm(x);
                    if r >= pow2(lo - 1) && r < pow2(hi) {
                        1.0
                    } else {
                        0.0
                    }
                })?
            }
            Self::PowerTail { beta, cutoff } => grid.sample(|x| {
                let r = euclidean_norm(x);
                if r < cutoff {
                    r.powf(-beta)
                } else {
                    0.0
                }
            })?,
            Self::Gaussian(sigma) => {
                grid.sample(|x| (-euclidean_norm(x).powi(2) / (2.0 * sigma * sigma)).exp())?
            }
            Self::RandomDyadic(seed) => {
                let n = grid.grid.dim();
                let pieces = d.num_annuli() * 2 * (1 << n);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let table: Vec<f64> = (0..pieces)
                    .map(|_| {
                        let v: f64 = rng.gen();
                        if rng.gen::<f64>() < RANDOM_ZERO_PROB {
                            0.0
                        } else {
                            v
                        }
                    })
                    .collect();
                let k_min = d.k_min();
                let k_max = d.k_max();
                grid.sample(|x| {
                    let r = euclidean_norm(x);
                    let Some(k) = crate::grid::annulus_index(r, k_min, k_max) else {
                        return 0.0;
                    };
                    let half = usize::from(r >= 1.5 * pow2(k - 1));
                    let orthant = x
                        .iter()
                        .enumerate()
                        .fold(0usize, |acc, (i, &xi)| acc | (usize::from(xi < 0.0) << i));
                    let idx = (((k - k_min) as usize * 2 + half) << n) | orthant;
                    table[idx]
                })?
            }
            Self::Zero => grid.zeros(),
        };
        restrict(&f, &d.coverage_mask())
    }

    pub fn id(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for CorpusFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Annulus(j) => write!(f, "annulus:{j}"),
            Self::AnnulusSum(a, b) => write!(f, "annulus_sum:{a}:{b}"),
            Self::PowerTail { beta, cutoff } => write!(f, "power_tail:{beta}:{cutoff}"),
            Self::Gaussian(s) => write!(f, "gaussian:{s}"),
            Self::RandomDyadic(seed) => write!(f, "random:{seed}"),
            Self::Zero => write!(f, "zero"),
        }
    }
}

impl FromStr for CorpusFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || Error::Parse(format!("bad function spec `{s}`"));
        let int = |v: &str| v.parse::<i32>().map_err(|_| bad());
        let real = |v: &str| v.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            ["annulus", j] => Ok(Self::Annulus(int(j)?)),
            ["annulus_sum", a, b] => Ok(Self::AnnulusSum(int(a)?, int(b)?)),
            ["power_tail", beta, cutoff] => Ok(Self::PowerTail {
                beta: real(beta)?,
                cutoff: real(cutoff)?,
            }),
            ["power_tail", beta] => Ok(Self::PowerTail {
                beta: real(beta)?,
                cutoff: 1.0,
            }),
            ["gaussian", s] => Ok(Self::Gaussian(real(s)?)),
            ["random", seed] => Ok(Self::RandomDyadic(seed.parse().map_err(|_| bad())?)),
            ["zero"] => Ok(Self::Zero),
            _ => Err(bad()),
        }
    }
}

/// Corpus families together with the grid they are sampled on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub families: Vec<CorpusFamily>,
    pub grid: GridParams,
}

impl CorpusSpec {
    /// Annulus indicators over the whole range, two annulus sums, a power
    /// tail, a Gaussian, `random` seeded step functions and the zero function.
    pub fn standard(grid: GridParams, seed: u64, random: usize) -> Self {
        let mut families: Vec<CorpusFamily> = (grid.k_min..=grid.k_max)
            .map(CorpusFamily::Annulus)
            .collect();
        families.push(CorpusFamily::AnnulusSum(grid.k_min, grid.k_max));
        families.push(CorpusFamily::AnnulusSum(
            (-1).max(grid.k_min),
            1.min(grid.k_max),
        ));
        families.push(CorpusFamily::PowerTail {
            beta: 0.2,
            cutoff: 1.0,
        });
        families.push(CorpusFamily::Gaussian(0.5));
        families.extend((0..random as u64).map(|i| CorpusFamily::RandomDyadic(seed + i)));
        families.push(CorpusFamily::Zero);
        Self { families, grid }
    }

    /// Annulus indicators only.
    pub fn annuli(grid: GridParams) -> Self {
        Self {
            families: (grid.k_min..=grid.k_max)
                .map(CorpusFamily::Annulus)
                .collect(),
            grid,
        }
    }

    pub fn generate(&self, grid: &DyadicGrid) -> Result<Vec<(String, GridFunction)>> {
        self.families
            .iter()
            .map(|f| Ok((f.id(), f.generate(grid)?)))
            .collect()
    }
}

/// Operator choice independent of any grid; the commutators use the
/// symbol `log|x|` sampled on the grid they are built for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OperatorChoice {
    Hl,
    Fractional(f64),
    Riesz(f64),
    Mb,
    Mbl(f64),
}

impl OperatorChoice {
    pub fn build(&self, grid: &DyadicGrid) -> Result<OperatorSpec> {
        let kind = match *self {
            Self::Hl => OperatorKind::HlMaximal,
            Self::Fractional(l) => OperatorKind::FractionalMaximal { l },
            Self::Riesz(l) => OperatorKind::RieszPotential { l },
            Self::Mb => OperatorKind::CommutatorMb {
                symbol: BmoSymbol::log_abs(&grid.grid)?,
            },
            Self::Mbl(l) => OperatorKind::CommutatorMbl {
                l,
                symbol: BmoSymbol::log_abs(&grid.grid)?,
            },
        };
        let spec = OperatorSpec::new(kind);
        spec.validate(grid.grid.dim())?;
        Ok(spec)
    }

    /// Theorems this operator may be swept against.
    pub fn pairs_with(&self, theorem: TheoremId) -> bool {
        use TheoremId::*;
        match self {
            Self::Hl => matches!(theorem, Thm3_1 | Cor3_1),
            Self::Fractional(_) | Self::Riesz(_) => matches!(theorem, Thm3_2 | Cor3_2),
            Self::Mb => matches!(theorem, Thm4_1 | Thm4_3 | Cor4_1),
            Self::Mbl(_) => matches!(theorem, Thm4_2),
        }
    }

    /// The operator's own order, compared against the `l` of the exponents.
    pub fn order(&self) -> Option<f64> {
        match *self {
            Self::Fractional(l) | Self::Riesz(l) | Self::Mbl(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for OperatorChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Hl => write!(f, "hl"),
            Self::Fractional(l) => write!(f, "fractional:{l}"),
            Self::Riesz(l) => write!(f, "riesz:{l}"),
            Self::Mb => write!(f, "mb"),
            Self::Mbl(l) => write!(f, "mbl:{l}"),
        }
    }
}

impl FromStr for OperatorChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad operator spec `{s}`"));
        let parts: Vec<&str> = s.trim().split(':').collect();
        let l = |v: &str| v.parse::<f64>().map_err(|_| bad());
        match parts.as_slice() {
            ["hl"] | ["hl_maximal"] => Ok(Self::Hl),
            ["fractional", v] | ["fractional_maximal", v] => Ok(Self::Fractional(l(v)?)),
            ["riesz", v] => Ok(Self::Riesz(l(v)?)),
            ["mb"] => Ok(Self::Mb),
            ["mbl", v] => Ok(Self::Mbl(l(v)?)),
            _ => Err(bad()),
        }
    }
}

/// Rejects operator/theorem pairs the harness does not cover and orders
/// that contradict the exponent coupling.
pub fn gate(op: OperatorChoice, theorem: TheoremId, points: &[ExponentParams]) -> Result<()> {
    if !op.pairs_with(theorem) {
        return Err(Error::OperatorTheoremMismatch {
            operator: op.to_string(),
            theorem: theorem.to_string(),
        });
    }
    for p in points {
        let verdict = check(theorem, p)?;
        if let Some(order) = op.order() {
            let l = p.l.ok_or(Error::MissingParameter("l"))?;
            if (order - l).abs() > crate::exponents::EQ_TOL {
                return Err(Error::CouplingMismatch(format!(
                    "operator order {order} differs from l = {l}"
                )));
            }
        }
        if let Some(c) = verdict
            .margins
            .iter()
            .find(|c| c.kind == crate::exponents::ClauseKind::Equality && !c.satisfied)
        {
            return Err(Error::CouplingMismatch(c.clause.clone()));
        }
    }
    Ok(())
}

/// One (function, exponent point) row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub schema: &'static str,
    pub function: String,
    pub operator: String,
    pub theorem: String,
    pub point: usize,
    pub n: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub p_source: f64,
    pub q_source: String,
    pub p_target: f64,
    pub q_target: String,
    pub l: Option<f64>,
    pub source_norm: f64,
    pub target_norm: f64,
    pub ratio: Option<f64>,
    pub degenerate: bool,
    pub admissible: bool,
    pub k_min: i32,
    pub k_max: i32,
    pub samples_per_octave: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub point: usize,
    pub admissible: bool,
    pub max_ratio: Option<f64>,
    pub argmax: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummary>,
}

fn join(q: &[f64]) -> String {
    q.iter()
        .map(|v| format!("{v}"))
        .collect::<Vec<_>>()
        .join(";")
}

fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T], header: &[&str]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(header)?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

impl SweepReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.rows, &["schema", "function"])
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(
            out,
            &self.summary,
            &["point", "admissible", "max_ratio", "argmax"],
        )
    }

    /// Largest admissible-point ratio per point, in point order.
    pub fn max_ratios(&self) -> Vec<Option<f64>> {
        self.summary.iter().map(|s| s.max_ratio).collect()
    }
}

/// Source and target norms of every corpus function at every exponent
/// point, with the ratio `||Tf|| / ||f||`.
pub fn boundedness_sweep(
    op: OperatorChoice,
    theorem: TheoremId,
    corpus: &CorpusSpec,
    points: &[ExponentParams],
) -> Result<SweepReport> {
    gate(op, theorem, points)?;
    let grid = corpus.grid.build()?;
    let n = grid.grid.dim();
    for p in points {
        if p.n != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.n,
            });
        }
    }
    let spec = op.build(&grid)?;
    let functions = corpus.generate(&grid)?;
    let d = &grid.decomposition;
    let coverage = d.coverage_mask();

    struct Point {
        alpha: f64,
        lambda: f64,
        p1: f64,
        q1: ExponentVector,
        p2: f64,
        q2: ExponentVector,
        l: Option<f64>,
        admissible: bool,
    }
    let prepared = points
        .iter()
        .map(|p| {
            let (p1, q1) = p.source(theorem)?;
            let (p2, q2) = p.target(theorem)?;
            Ok(Point {
                alpha: p.alpha.ok_or(Error::MissingParameter("alpha"))?,
                lambda: p.lambda.ok_or(Error::MissingParameter("lambda"))?,
                p1,
                q1: ExponentVector::new(q1)?,
                p2,
                q2: ExponentVector::new(q2)?,
                l: p.l,
                admissible: check(theorem, p)?.admissible,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let per_function = functions
        .par_iter()
        .map(|(id, f)| {
            let tf = restrict(&spec.apply(f)?, &coverage)?;
            let mut rows = Vec::with_capacity(prepared.len());
            for (i, pt) in prepared.iter().enumerate() {
                let src = HerzMorreyParams::over(pt.alpha, pt.p1, pt.lambda, pt.q1.clone(), d)?;
                let tgt = HerzMorreyParams::over(pt.alpha, pt.p2, pt.lambda, pt.q2.clone(), d)?;
                let s = herz_morrey_norm(f, &src, d)?;
                let t = herz_morrey_norm(&tf, &tgt, d)?;
                let degenerate = s == 0.0;
                rows.push(SweepRow {
                    schema: SCHEMA_VERSION,
                    function: id.clone(),
                    operator: op.to_string(),
                    theorem: theorem.to_string(),
                    point: i,
                    n,
                    alpha: pt.alpha,
                    lambda: pt.lambda,
                    p_source: pt.p1,
                    q_source: join(pt.q1.as_slice()),
                    p_target: pt.p2,
                    q_target: join(pt.q2.as_slice()),
                    l: pt.l,
                    source_norm: s,
                    target_norm: t,
                    ratio: (!degenerate).then(|| t / s),
                    degenerate,
                    admissible: pt.admissible,
                    k_min: d.k_min(),
                    k_max: d.k_max(),
                    samples_per_octave: corpus.grid.samples_per_octave,
                });
            }
            Ok(rows)
        })
        .collect::<Result<Vec<_>>>()?;

    // rows ordered by (point, function) regardless of completion order
    let mut rows = Vec::with_capacity(functions.len() * points.len());
    for i in 0..points.len() {
        for fr in &per_function {
            rows.push(fr[i].clone());
        }
    }
    let summary = (0..points.len())
        .map(|i| {
            let best = rows
                .iter()
                .filter(|r| r.point == i)
                .filter_map(|r| r.ratio.map(|x| (x, &r.function)))
                .fold(None, |acc: Option<(f64, &String)>, (x, id)| match acc {
                    Some((m, _)) if m >= x => acc,
                    _ => Some((x, id)),
                });
            SweepSummary {
                point: i,
                admissible: prepared[i].admissible,
                max_ratio: best.map(|b| b.0),
                argmax: best.map(|b| b.1.clone()),
            }
        })
        .collect();
    Ok(SweepReport { rows, summary })
}

/// Max ratio per exponent point at two resolutions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementRow {
    pub schema: &'static str,
    pub point: usize,
    pub coarse_spo: usize,
    pub fine_spo: usize,
    pub coarse_max_ratio: f64,
    pub fine_max_ratio: f64,
    pub relative_change: f64,
}

/// Runs the same sweep at `samples_per_octave` and twice that.
pub fn refinement_study(
    op: OperatorChoice,
    theorem: TheoremId,
    corpus: &CorpusSpec,
    points: &[ExponentParams],
) -> Result<Vec<RefinementRow>> {
    let coarse = boundedness_sweep(op, theorem, corpus, points)?;
    let fine_spec = CorpusSpec {
        families: corpus.families.clone(),
        grid: corpus.grid.with_spo(corpus.grid.samples_per_octave * 2),
    };
    let fine = boundedness_sweep(op, theorem, &fine_spec, points)?;
    Ok(coarse
        .summary
        .iter()
        .zip(&fine.summary)
        .map(|(c, f)| {
            let a = c.max_ratio.unwrap_or(0.0);
            let b = f.max_ratio.unwrap_or(0.0);
            RefinementRow {
                schema: SCHEMA_VERSION,
                point: c.point,
                coarse_spo: corpus.grid.samples_per_octave,
                fine_spo: fine_spec.grid.samples_per_octave,
                coarse_max_ratio: a,
                fine_max_ratio: b,
                relative_change: if a == 0.0 && b == 0.0 {
                    0.0
                } else {
                    (b - a).abs() / a.abs().max(b.abs())
                },
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    DivergenceObserved,
    NoDivergenceObserved,
    Inconclusive,
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::DivergenceObserved => "divergence observed",
            Self::NoDivergenceObserved => "no divergence observed",
            Self::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub schema: &'static str,
    pub k_min: i32,
    pub k_max: i32,
    pub width: i32,
    pub max_ratio: f64,
    pub argmax: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeReport {
    pub failed_clause: String,
    pub rows: Vec<ProbeRow>,
    /// `(width, 2·width, ratio growth)` for every doubling pair present.
    pub growth: Vec<(i32, i32, f64)>,
    pub trend: Trend,
}

impl ProbeReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.rows, &["schema", "k_min"])
    }
}

/// Growth factor that counts as divergence when the k-range width doubles.
pub const DIVERGENCE_GROWTH: f64 = 1.5;

/// Max ratio over single-annulus indicators on growing k-ranges, for
/// parameters failing exactly one hypothesis.
pub fn divergence_probe(
    op: OperatorChoice,
    theorem: TheoremId,
    params: &ExponentParams,
    ranges: &[(i32, i32)],
    samples_per_octave: usize,
) -> Result<ProbeReport> {
    let verdict = check(theorem, params)?;
    if verdict.admissible {
        return Err(Error::InvalidProbe("parameters are admissible".into()));
    }
    if verdict.failed_clauses.len() != 1 {
        return Err(Error::InvalidProbe(format!(
            "{} clauses fail: {}",
            verdict.failed_clauses.len(),
            verdict.failed_clauses.join(", ")
        )));
    }
    if !op.pairs_with(theorem) {
        return Err(Error::OperatorTheoremMismatch {
            operator: op.to_string(),
            theorem: theorem.to_string(),
        });
    }
    if ranges.is_empty() {
        return Err(Error::InvalidParameter("no k-ranges given".into()));
    }
    let mut rows = Vec::with_capacity(ranges.len());
    for &(k_min, k_max) in ranges {
        let corpus =
            CorpusSpec::annuli(GridParams::new(params.n, k_min, k_max, samples_per_octave));
        let report =
            boundedness_sweep_unchecked(op, theorem, &corpus, std::slice::from_ref(params))?;
        let s = &report.summary[0];
        rows.push(ProbeRow {
            schema: SCHEMA_VERSION,
            k_min,
            k_max,
            width: k_max - k_min,
            max_ratio: s.max_ratio.unwrap_or(0.0),
            argmax: s.argmax.clone().unwrap_or_default(),
        });
    }
    let mut growth = Vec::new();
    for a in &rows {
        for b in &rows {
            if a.width > 0 && b.width == 2 * a.width && a.max_ratio > 0.0 {
                growth.push((a.width, b.width, b.max_ratio / a.max_ratio));
            }
        }
    }
    let trend = if growth.is_empty() {
        Trend::Inconclusive
    } else if growth.iter().any(|g| g.2 >= DIVERGENCE_GROWTH) {
        Trend::DivergenceObserved
    } else {
        Trend::NoDivergenceObserved
    };
    Ok(ProbeReport {
        failed_clause: verdict.failed_clauses[0].clone(),
        rows,
        growth,
        trend,
    })
}

/// Sweep without the coupling gate (the probe deliberately leaves the
/// admissible region, possibly through a coupling clause).
fn boundedness_sweep_unchecked(
    op: OperatorChoice,
    theorem: TheoremId,
    corpus: &CorpusSpec,
    points: &[ExponentParams],
) -> Result<SweepReport> {
    match gate(op, theorem, points) {
        Ok(()) | Err(Error::CouplingMismatch(_)) => {}
        Err(e) => return Err(e),
    }
    let mut relaxed = points.to_vec();
    if let Some(order) = op.order() {
        for p in &mut relaxed {
            p.l = Some(order);
        }
    }
    // equality clauses are not re-checked here
    let grid = corpus.grid.build()?;
    let spec = op.build(&grid)?;
    let functions = corpus.generate(&grid)?;
    let d = &grid.decomposition;
    let coverage = d.coverage_mask();
    let p = &relaxed[0];
    let (p1, q1) = p.source(theorem)?;
    let (p2, q2) = p.target(theorem)?;
    let alpha = p.alpha.ok_or(Error::MissingParameter("alpha"))?;
    let lambda = p.lambda.ok_or(Error::MissingParameter("lambda"))?;
    let src = HerzMorreyParams::over(alpha, p1, lambda, ExponentVector::new(q1)?, d)?;
    let tgt = HerzMorreyParams::over(alpha, p2, lambda, ExponentVector::new(q2)?, d)?;
    let ratios = functions
        .par_iter()
        .map(|(id, f)| {
            let s = herz_morrey_norm(f, &src, d)?;
            let tf = restrict(&spec.apply(f)?, &coverage)?;
            let t = herz_morrey_norm(&tf, &tgt, d)?;
            Ok((id.clone(), (s > 0.0).then(|| t / s)))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = ratios.iter().filter_map(|(id, r)| r.map(|x| (x, id))).fold(
        None,
        |acc: Option<(f64, &String)>, (x, id)| match acc {
            Some((m, _)) if m >= x => acc,
            _ => Some((x, id)),
        },
    );
    Ok(SweepReport {
        rows: Vec::new(),
        summary: vec![SweepSummary {
            point: 0,
            admissible: false,
            max_ratio: best.map(|b| b.0),
            argmax: best.map(|b| b.1.clone()),
        }],
    })
}

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteLine {
    pub schema: &'static str,
    pub suite: String,
    pub check: String,
    pub cases: usize,
    pub violations: usize,
    /// Smallest slack `rhs - lhs` seen (negative on violation).
    pub worst_margin: f64,
    pub passed: bool,
}

impl SuiteLine {
    fn new(suite: &str, check: &str) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            suite: suite.into(),
            check: check.into(),
            cases: 0,
            violations: 0,
            worst_margin: f64::INFINITY,
            passed: true,
        }
    }

    /// Records `lhs <= rhs` with an allowed relative slack.
    fn le(&mut self, lhs: f64, rhs: f64, rel_slack: f64) {
        self.cases += 1;
        let margin = rhs - lhs;
        self.worst_margin = self.worst_margin.min(margin);
        if !(lhs <= rhs + rel_slack * rhs.abs().max(lhs.abs())) {
            self.violations += 1;
            self.passed = false;
        }
    }

    fn finish(mut self) -> Self {
        if self.cases == 0 {
            self.worst_margin = 0.0;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub lines: Vec<SuiteLine>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_rows(out, &self.lines, &["schema", "suite"])
    }
}

/// `(alpha, q, lambda)` grid of the inclusion suite: 5 × 5 × 3.
pub const INCLUSION_ALPHAS: [f64; 5] = [-0.5, -0.2, 0.0, 0.3, 0.7];
pub const INCLUSION_QS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, 4.0];
pub const INCLUSION_LAMBDAS: [f64; 3] = [0.0, 0.1, 0.3];
const INCLUSION_PS: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// Constant of the `alpha`-inclusion for `f` whose lowest annulus is
/// `k_lo`: `2^(max(0, -k_lo)(alpha1 - alpha2))`.
pub fn alpha_inclusion_constant(k_lo: i32, alpha1: f64, alpha2: f64) -> f64 {
    ((-k_lo).max(0) as f64 * (alpha1 - alpha2)).exp2()
}

/// Constant of the `q`-inclusion with shifted index in dimension `n`:
/// 1 for `n = 1`, `2^δ` otherwise.
pub fn q_inclusion_constant(n: usize, delta: f64) -> f64 {
    if n == 1 {
        1.0
    } else {
        delta.exp2()
    }
}

/// Inclusion inequalities over `corpus`:
/// (1) the norm does not increase with `p`;
/// (2) for `alpha2 <= alpha1`, `||f||_{alpha2} <= C ||f||_{alpha1}`;
/// (3) for `q1 <= q2` and `δ = Σ(1/q1i - 1/q2i)`,
///     `||f||_{alpha, q1} <= C ||f||_{alpha + δ, q2}` on annulus-supported `f`.
pub fn inclusion_suite(corpus: &CorpusSpec) -> Result<Vec<SuiteLine>> {
    if corpus.families.is_empty() {
        return Err(Error::InvalidParameter("empty corpus".into()));
    }
    let grid = corpus.grid.build()?;
    let d = &grid.decomposition;
    let n = grid.grid.dim();
    let functions = corpus.generate(&grid)?;
    let mut l1 = SuiteLine::new("inclusion", "p-monotonicity");
    let mut l2 = SuiteLine::new("inclusion", "alpha-monotonicity");
    let mut l3 = SuiteLine::new("inclusion", "q-inclusion-shifted-alpha");
    for (_, f) in &functions {
        let range = d.support_range(f);
        for &qv in &INCLUSION_QS {
            let q = ExponentVector::constant(qv, n)?;
            let norms = annulus_norms(f, &q, d)?;
            for &alpha in &INCLUSION_ALPHAS {
                for &lambda in &INCLUSION_LAMBDAS {
                    let base = HerzMorreyParams::over(alpha, 1.0, lambda, q.clone(), d)?;
                    let by_p: Vec<f64> = INCLUSION_PS
                        .iter()
                        .map(|&p| herz_morrey_from_annuli(&norms, &base.with_p(p), d))
                        .collect::<Result<_>>()?;
                    for w in by_p.windows(2) {
                        l1.le(w[1], w[0], 0.0);
                    }
                    // (2) against every larger alpha in the grid
                    for &alpha1 in INCLUSION_ALPHAS.iter().filter(|&&a| a >= alpha) {
                        let Some((k_lo, _)) = range else {
                            l2.le(0.0, 0.0, 0.0);
                            continue;
                        };
                        let c = alpha_inclusion_constant(k_lo, alpha1, alpha);
                        let lo = herz_morrey_from_annuli(&norms, &base, d)?;
                        let hi = herz_morrey_from_annuli(&norms, &base.with_alpha(alpha1), d)?;
                        let slack = if c == 1.0 { 0.0 } else { 1e-12 };
                        l2.le(lo, c * hi, slack);
                    }
                }
            }
        }
        // (3) on functions supported in one annulus
        if let Some((a, b)) = range {
            if a == b {
                for (i, &q1v) in INCLUSION_QS.iter().enumerate() {
                    for &q2v in &INCLUSION_QS[i..] {
                        let q1 = ExponentVector::constant(q1v, n)?;
                        let q2 = ExponentVector::constant(q2v, n)?;
                        let delta = q1.reciprocal_sum() - q2.reciprocal_sum();
                        let c = q_inclusion_constant(n, delta);
                        for &alpha in &INCLUSION_ALPHAS {
                            for &lambda in &INCLUSION_LAMBDAS {
                                let lhs = herz_morrey_norm(
                                    f,
                                    &HerzMorreyParams::over(alpha, 1.0, lambda, q1.clone(), d)?,
                                    d,
                                )?;
                                let rhs = herz_morrey_norm(
                                    f,
                                    &HerzMorreyParams::over(
                                        alpha + delta,
                                        1.0,
                                        lambda,
                                        q2.clone(),
                                        d,
                                    )?,
                                    d,
                                )?;
                                l3.le(lhs, c * rhs, 1e-12);
                            }
                        }
                    }
                }
            }
        } else {
            l3.le(0.0, 0.0, 0.0);
        }
    }
    Ok(vec![l1.finish(), l2.finish(), l3.finish()])
}

/// `||f + g|| / (||f|| + ||g||) <= max(1, 2^(Σ(1 - q_i)/q_i))` over
/// `pairs` seeded random pairs from the corpus, `p >= 1`, `q_i >= 1`.
pub fn quasi_triangle_suite(grid: GridParams, seed: u64, pairs: usize) -> Result<SuiteLine> {
    let g = grid.build()?;
    let d = &g.decomposition;
    let n = g.grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut line = SuiteLine::new("quasi_triangle", "defect-bound");
    for _ in 0..pairs {
        let f = CorpusFamily::RandomDyadic(rng.gen()).generate(&g)?;
        let h = CorpusFamily::RandomDyadic(rng.gen()).generate(&g)?;
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..4.0)).collect();
        let q = ExponentVector::new(q)?;
        let alpha = rng.gen_range(-1.0..1.0);
        let p = rng.gen_range(1.0..4.0);
        let lambda = rng.gen_range(0.0..0.5);
        let params = HerzMorreyParams::over(alpha, p, lambda, q.clone(), d)?;
        let defect = quasi_triangle_defect(&f, &h, &params, d)?;
        line.le(defect, quasi_triangle_constant(&q) + 1e-12, 0.0);
    }
    Ok(line.finish())
}

/// Closed-form annulus norms, reductions and the weighted-norm comparison.
pub fn norm_identity_suite(corpus: &CorpusSpec) -> Result<Vec<SuiteLine>> {
    let grid = corpus.grid.build()?;
    let d = &grid.decomposition;
    let n = grid.grid.dim();
    let functions = corpus.generate(&grid)?;
    let mut closed = SuiteLine::new("norms", "closed-form-annulus");
    if n == 1 {
        for j in d.ks() {
            let f = grid.annulus_indicator(j);
            for alpha in [-0.3, 0.0, 0.7] {
                for qv in [1.0, 2.0, 4.0] {
                    for lambda in [0.0, 0.1] {
                        let q = ExponentVector::constant(qv, 1)?;
                        let v = herz_morrey_norm(
                            &f,
                            &HerzMorreyParams::over(alpha, 1.0, lambda, q, d)?,
                            d,
                        )?;
                        let expected = (j as f64 * (alpha + 1.0 / qv - lambda)).exp2();
                        closed.le((v - expected).abs(), 1e-10 * expected, 0.0);
                    }
                }
            }
        }
    }
    let mut red1 = SuiteLine::new("norms", "lambda-zero-herz-morrey-equals-herz");
    let mut red2 = SuiteLine::new("norms", "constant-q-equals-scalar-lq");
    let mut weighted = SuiteLine::new("norms", "weighted-equivalence-single-annulus");
    for (_, f) in &functions {
        for qv in [1.0, 2.0, 3.5] {
            let q = ExponentVector::constant(qv, n)?;
            for alpha in [-0.4, 0.0, 0.6] {
                for p in [0.5, 1.0, 3.0] {
                    let hm = herz_morrey_norm(
                        f,
                        &HerzMorreyParams::new(alpha, p, 0.0, q.clone(), d.k_max()..=d.k_max())?,
                        d,
                    )?;
                    let h = herz_norm(f, alpha, p, &q, d)?;
                    red1.le((hm - h).abs(), 0.0, 0.0);
                }
            }
            let mixed = mixed_lebesgue_norm(f, &q)?;
            let scalar = scalar_lebesgue_norm(f, qv)?;
            red2.le((mixed - scalar).abs(), 1e-10 * scalar, 0.0);
        }
        if n == 1 {
            if let Some((a, b)) = d.support_range(f) {
                if a == b {
                    for alpha in [-0.5, 0.0, 0.8] {
                        for qv in [1.0, 2.0, 3.0] {
                            let q = ExponentVector::constant(qv, 1)?;
                            let hm = herz_morrey_norm(
                                f,
                                &HerzMorreyParams::over(alpha, qv, 0.0, q.clone(), d)?,
                                d,
                            )?;
                            let w = weighted_mixed_norm(f, &q, &[alpha])?;
                            let c = f64::exp2(alpha.abs());
                            weighted.le(hm, c * w, 1e-12);
                            weighted.le(w, c * hm, 1e-12);
                        }
                    }
                }
            }
        }
    }
    Ok(vec![
        closed.finish(),
        red1.finish(),
        red2.finish(),
        weighted.finish(),
    ])
}

/// Exponent-checker consistency: region polygons against `check` on
/// seeded random points, and zero-margin boundary points.
pub fn exponent_suite(seed: u64, samples: usize) -> Result<Vec<SuiteLine>> {
    let mut mc = SuiteLine::new("exponents", "region-vs-check");
    let mut boundary = SuiteLine::new("exponents", "boundary-inadmissible");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for theorem in TheoremId::ALL {
        let (fixed, window) = region_setup(theorem);
        let region = region_boundary(theorem, &fixed, [FreeAxis::Alpha, FreeAxis::Lambda], window)?;
        for _ in 0..samples {
            let u = rng.gen_range(window[0][0]..window[0][1]);
            let v = rng.gen_range(window[1][0]..window[1][1]);
            let mut p = fixed.clone();
            p.alpha = Some(u);
            p.lambda = Some(v);
            let by_check = check(theorem, &p)?.admissible;
            let by_region = region.contains(u, v);
            mc.le(f64::from(u8::from(by_check != by_region)), 0.0, 0.0);
        }
        // upper alpha boundary at lambda = 0.1
        let mut p = fixed.clone();
        p.lambda = Some(0.1);
        let upper = match theorem.family() {
            Family::SameSpace => {
                let (_, q) = p.source(theorem)?;
                p.n as f64 * (1.0 - q.iter().map(|x| 1.0 / x).sum::<f64>() / p.n as f64)
            }
            _ => {
                let (_, q1) = p.source(theorem)?;
                p.n as f64 - q1.iter().map(|x| 1.0 / x).sum::<f64>()
            }
        };
        p.alpha = Some(upper);
        let v = check(theorem, &p)?;
        boundary.le(f64::from(u8::from(v.admissible)), 0.0, 0.0);
    }
    Ok(vec![mc.finish(), boundary.finish()])
}

/// Fixed parameters (n = 1) and `(alpha, lambda)` window used for region
/// checks of each theorem.
pub fn region_setup(theorem: TheoremId) -> (ExponentParams, [[f64; 2]; 2]) {
    let window = [[-1.5, 1.5], [0.0, 1.0]];
    let fixed = match theorem.family() {
        Family::SameSpace => ExponentParams::same_space(1, 0.0, 1.0, 0.1, 2.0),
        Family::Fractional | Family::FractionalTypeCommutator => {
            ExponentParams::two_space(1, 0.0, 1.0, 2.0, 0.1, 2.0, 4.0, 0.25)
        }
        Family::FractionalCommutator => {
            ExponentParams::two_space(1, 0.0, 1.0, 2.0, 0.1, 2.0, 4.0, 4.0)
        }
    };
    (fixed, window)
}

/// Every invariant suite on a fixed, seeded configuration.
pub fn run_suite(seed: u64) -> Result<SuiteReport> {
    let grid = GridParams::new(1, -3, 3, 8);
    let corpus = CorpusSpec::standard(grid, seed, 20);
    let mut lines = norm_identity_suite(&corpus)?;
    lines.extend(inclusion_suite(&corpus)?);
    lines.push(quasi_triangle_suite(grid, seed, 100)?);
    lines.push(quasi_triangle_suite(
        GridParams::new(2, -1, 1, 2),
        seed + 1,
        20,
    )?);
    lines.extend(exponent_suite(seed, 2000)?);
    lines.extend(operator_suite(seed)?);
    Ok(SuiteReport { lines })
}

/// Pointwise operator properties on small grids.
pub fn operator_suite(seed: u64) -> Result<Vec<SuiteLine>> {
    let g = GridParams::new(1, -2, 2, 4).build()?;
    let radii = RadiusSet::default_for(&g.grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sub = SuiteLine::new("operators", "sublinearity");
    let mut mono = SuiteLine::new("operators", "monotonicity");
    let mut dom = SuiteLine::new("operators", "commutator-domination");
    let b = BmoSymbol::log_abs(&g.grid)?;
    let bound = 2.0 * b.sup_abs();
    let ops = [
        OperatorChoice::Hl,
        OperatorChoice::Fractional(0.5),
        OperatorChoice::Riesz(0.5),
        OperatorChoice::Mb,
        OperatorChoice::Mbl(2.0),
    ];
    for _ in 0..5 {
        let f = CorpusFamily::RandomDyadic(rng.gen()).generate(&g)?;
        let h = CorpusFamily::RandomDyadic(rng.gen()).generate(&g)?;
        let fh = f.add(&h)?;
        let big = f.add(&h.abs())?;
        for op in ops {
            let mut spec = op.build(&g)?;
            spec.radii = Some(radii.clone());
            let tf = spec.apply(&f)?;
            let th = spec.apply(&h)?;
            let tfh = spec.apply(&fh)?;
            let tbig = spec.apply(&big)?;
            for i in 0..tf.as_slice().len() {
                let (a, c, s) = (tf.as_slice()[i], th.as_slice()[i], tfh.as_slice()[i]);
                sub.le(s.abs(), a.abs() + c.abs(), 1e-12);
                mono.le(a, tbig.as_slice()[i], 0.0);
            }
        }
        let mf = OperatorSpec::with_radii(OperatorKind::HlMaximal, radii.clone()).apply(&f)?;
        let mbf = OperatorSpec::with_radii(
            OperatorKind::CommutatorMb { symbol: b.clone() },
            radii.clone(),
        )
        .apply(&f)?;
        for (x, y) in mbf.as_slice().iter().zip(mf.as_slice()) {
            dom.le(*x, bound * y, 1e-12);
        }
    }
    Ok(vec![sub.finish(), mono.finish(), dom.finish()])
}
