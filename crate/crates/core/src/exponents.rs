//! Exponent admissibility for the boundedness theorems and the admissible
//! region over two free parameters.
//!
//! Every hypothesis is encoded as printed. Strict inequalities fail at zero
//! margin; equalities hold within [`EQ_TOL`].

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the coupling equalities between `l` and the `q` exponents.
pub const EQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    #[serde(rename = "thm3_1")]
    Thm3_1,
    #[serde(rename = "cor3_1")]
    Cor3_1,
    #[serde(rename = "thm3_2")]
    Thm3_2,
    #[serde(rename = "cor3_2")]
    Cor3_2,
    #[serde(rename = "thm4_1")]
    Thm4_1,
    #[serde(rename = "thm4_2")]
    Thm4_2,
    #[serde(rename = "thm4_3")]
    Thm4_3,
    #[serde(rename = "cor4_1")]
    Cor4_1,
    #[serde(rename = "thm4_4_commutator_fractional")]
    Thm4_4CommutatorFractional,
    #[serde(rename = "cor4_2")]
    Cor4_2,
}

impl TheoremId {
    pub const ALL: [TheoremId; 10] = [
        Self::Thm3_1,
        Self::Cor3_1,
        Self::Thm3_2,
        Self::Cor3_2,
        Self::Thm4_1,
        Self::Thm4_2,
        Self::Thm4_3,
        Self::Cor4_1,
        Self::Thm4_4CommutatorFractional,
        Self::Cor4_2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Thm3_1 => "thm3_1",
            Self::Cor3_1 => "cor3_1",
            Self::Thm3_2 => "thm3_2",
            Self::Cor3_2 => "cor3_2",
            Self::Thm4_1 => "thm4_1",
            Self::Thm4_2 => "thm4_2",
            Self::Thm4_3 => "thm4_3",
            Self::Cor4_1 => "cor4_1",
            Self::Thm4_4CommutatorFractional => "thm4_4_commutator_fractional",
            Self::Cor4_2 => "cor4_2",
        }
    }

    pub fn family(self) -> Family {
        match self {
            Self::Thm3_1 | Self::Cor3_1 | Self::Thm4_1 | Self::Thm4_3 | Self::Cor4_1 => {
                Family::SameSpace
            }
            Self::Thm3_2 | Self::Cor3_2 => Family::Fractional,
            Self::Thm4_2 => Family::FractionalCommutator,
            Self::Thm4_4CommutatorFractional | Self::Cor4_2 => Family::FractionalTypeCommutator,
        }
    }

    /// Whether the source and target spaces differ (`p1, q1 -> p2, q2`).
    pub fn is_two_space(self) -> bool {
        self.family() != Family::SameSpace
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['.', '-'], "_");
        Self::ALL
            .into_iter()
            .find(|t| {
                t.name() == key || (key == "thm4_4" && *t == Self::Thm4_4CommutatorFractional)
            })
            .ok_or_else(|| Error::Parse(format!("unknown theorem `{s}`")))
    }
}

/// Groups of theorems sharing the same hypothesis list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `T` bounded on one space, `(alpha, p, lambda, q)`.
    SameSpace,
    /// `I_l`, coupling `l = Σ1/q1 - Σ1/q2`.
    Fractional,
    /// `M_b^l`, coupling `1/l = (1/n)Σ1/q1 - (1/n)Σ1/q2`.
    FractionalCommutator,
    /// `[b, T_l]`, coupling `l = (1/n)Σ1/q1 - (1/n)Σ1/q2`.
    FractionalTypeCommutator,
}

/// Exponent tuple. Same-space theorems read `p` and `q` (falling back to
/// `p1`, `q1`); two-space theorems read `p1, p2, q1, q2, l`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExponentParams {
    pub n: usize,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub p1: Option<f64>,
    pub p2: Option<f64>,
    pub lambda: Option<f64>,
    pub q: Option<Vec<f64>>,
    pub q1: Option<Vec<f64>>,
    pub q2: Option<Vec<f64>>,
    pub l: Option<f64>,
}

impl ExponentParams {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            ..Self::default()
        }
    }

    /// Same-space parameters with `q = (q, .., q)`.
    pub fn same_space(n: usize, alpha: f64, p: f64, lambda: f64, q: f64) -> Self {
        Self {
            n,
            alpha: Some(alpha),
            p: Some(p),
            lambda: Some(lambda),
            q: Some(vec![q; n]),
            ..Self::default()
        }
    }

    /// Two-space parameters with constant exponent vectors.
    #[allow(clippy::too_many_arguments)]
    pub fn two_space(
        n: usize,
        alpha: f64,
        p1: f64,
        p2: f64,
        lambda: f64,
        q1: f64,
        q2: f64,
        l: f64,
    ) -> Self {
        Self {
            n,
            alpha: Some(alpha),
            p1: Some(p1),
            p2: Some(p2),
            lambda: Some(lambda),
            q1: Some(vec![q1; n]),
            q2: Some(vec![q2; n]),
            l: Some(l),
            ..Self::default()
        }
    }

    fn get(v: Option<f64>, name: &'static str) -> Result<f64> {
        v.ok_or(Error::MissingParameter(name))
    }

    fn vec(&self, v: &Option<Vec<f64>>, name: &'static str) -> Result<Vec<f64>> {
        let v = v.clone().ok_or(Error::MissingParameter(name))?;
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::InvalidExponent(format!(
                "{name} entries must lie in (0, inf)"
            )));
        }
        Ok(v)
    }

    /// Source exponents `(p, q)` of the theorem's domain space.
    pub fn source(&self, theorem: TheoremId) -> Result<(f64, Vec<f64>)> {
        if theorem.is_two_space() {
            Ok((Self::get(self.p1, "p1")?, self.vec(&self.q1, "q1")?))
        } else {
            let p = Self::get(self.p.or(self.p1), "p")?;
            let q = if self.q.is_some() {
                self.vec(&self.q, "q")?
            } else {
                self.vec(&self.q1, "q")?
            };
            Ok((p, q))
        }
    }

    /// Target exponents `(p, q)`; equal to the source for same-space theorems.
    pub fn target(&self, theorem: TheoremId) -> Result<(f64, Vec<f64>)> {
        if theorem.is_two_space() {
            Ok((Self::get(self.p2, "p2")?, self.vec(&self.q2, "q2")?))
        } else {
            self.source(theorem)
        }
    }

    pub fn value(&self, axis: FreeAxis) -> Option<f64> {
        match axis {
            FreeAxis::Alpha => self.alpha,
            FreeAxis::Lambda => self.lambda,
            FreeAxis::P => self.p,
            FreeAxis::P1 => self.p1,
            FreeAxis::P2 => self.p2,
            FreeAxis::L => self.l,
        }
    }

    pub fn set(&mut self, axis: FreeAxis, v: f64) {
        let slot = match axis {
            FreeAxis::Alpha => &mut self.alpha,
            FreeAxis::Lambda => &mut self.lambda,
            FreeAxis::P => &mut self.p,
            FreeAxis::P1 => &mut self.p1,
            FreeAxis::P2 => &mut self.p2,
            FreeAxis::L => &mut self.l,
        };
        *slot = Some(v);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClauseKind {
    Strict,
    NonStrict,
    Equality,
}

/// One evaluated hypothesis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClauseMargin {
    pub clause: String,
    pub kind: ClauseKind,
    /// Distance to the boundary: `rhs - lhs` for inequalities, `-|lhs - rhs|`
    /// for equalities.
    pub margin: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub theorem: TheoremId,
    pub admissible: bool,
    pub failed_clauses: Vec<String>,
    pub margins: Vec<ClauseMargin>,
    pub caveats: Vec<String>,
    pub diagnostics: Vec<String>,
}

impl AdmissibilityVerdict {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn margin(&self, clause: &str) -> Option<f64> {
        self.margins
            .iter()
            .find(|c| c.clause == clause)
            .map(|c| c.margin)
    }
}

struct Clauses(Vec<ClauseMargin>);

impl Clauses {
    /// `lhs < rhs`
    fn lt(&mut self, id: &str, lhs: f64, rhs: f64) {
        let m = rhs - lhs;
        self.push(id, ClauseKind::Strict, m, m > 0.0);
    }

    /// `lhs <= rhs`
    fn le(&mut self, id: &str, lhs: f64, rhs: f64) {
        let m = rhs - lhs;
        self.push(id, ClauseKind::NonStrict, m, m >= 0.0);
    }

    fn eq(&mut self, id: &str, lhs: f64, rhs: f64) {
        let d = (lhs - rhs).abs();
        self.push(id, ClauseKind::Equality, -d, d <= EQ_TOL);
    }

    fn push(&mut self, id: &str, kind: ClauseKind, margin: f64, satisfied: bool) {
        self.0.push(ClauseMargin {
            clause: id.to_string(),
            kind,
            margin,
            satisfied: satisfied && margin.is_finite(),
        });
    }
}

fn recip_sum(q: &[f64]) -> f64 {
    q.iter().map(|x| 1.0 / x).sum()
}

fn min_of(v: impl Iterator<Item = f64>) -> f64 {
    v.fold(f64::INFINITY, f64::min)
}

/// Evaluates every hypothesis of `theorem` at `params`.
pub fn check(theorem: TheoremId, params: &ExponentParams) -> Result<AdmissibilityVerdict> {
    if params.n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let n = params.n as f64;
    let alpha = ExponentParams::get(params.alpha, "alpha")?;
    let lambda = ExponentParams::get(params.lambda, "lambda")?;
    let mut c = Clauses(Vec::new());
    let mut diagnostics = Vec::new();
    match theorem.family() {
        Family::SameSpace => {
            let (p, q) = params.source(theorem)?;
            let s = recip_sum(&q);
            c.le("0 ≤ λ", 0.0, lambda);
            c.lt("0 < p", 0.0, p);
            c.lt("1 < qᵢ", 1.0, min_of(q.iter().copied()));
            c.lt("−Σ1/qᵢ + λ < α", -s + lambda, alpha);
            c.lt("α < n(1−(1/n)Σ1/qᵢ)", alpha, n * (1.0 - s / n));
        }
        family => {
            let l = ExponentParams::get(params.l, "l")?;
            let (p1, q1) = params.source(theorem)?;
            let (p2, q2) = params.target(theorem)?;
            let s1 = recip_sum(&q1);
            let s2 = recip_sum(&q2);
            let q1_min = min_of(q1.iter().copied());
            let q1_max = -min_of(q1.iter().map(|x| -x));
            match family {
                Family::Fractional => {
                    c.lt("0 < l", 0.0, l);
                    c.lt("l < n", l, n);
                }
                Family::FractionalCommutator => {
                    c.lt("1 < l", 1.0, l);
                }
                _ => {
                    c.lt("0 < l", 0.0, l);
                    c.lt("l < n", l, n);
                }
            }
            c.le("0 ≤ λ", 0.0, lambda);
            c.lt("0 < p₁", 0.0, p1);
            c.le("p₁ ≤ p₂", p1, p2);
            c.lt("1 < q₁ᵢ", 1.0, q1_min);
            let with_n = (s1 - s2) / n;
            let without_n = s1 - s2;
            match family {
                Family::Fractional => {
                    c.lt("q₁ᵢ < 1/l", q1_max, 1.0 / l);
                    c.eq("l = Σ1/q₁ᵢ − Σ1/q₂ᵢ", l, without_n);
                    if (l - without_n).abs() > EQ_TOL && (l - with_n).abs() <= EQ_TOL {
                        diagnostics.push(
                            "coupling fails as stated but holds with the 1/n factor used by the fractional commutator theorems".into(),
                        );
                    }
                }
                Family::FractionalCommutator => {
                    c.lt("q₁ᵢ < l", q1_max, l);
                    c.eq("1/l = (1/n)Σ1/q₁ᵢ − (1/n)Σ1/q₂ᵢ", 1.0 / l, with_n);
                    if (1.0 / l - with_n).abs() > EQ_TOL && (1.0 / l - without_n).abs() <= EQ_TOL {
                        diagnostics.push(
                            "coupling fails as stated but holds without the 1/n factor used by the fractional-integral theorems".into(),
                        );
                    }
                }
                _ => {
                    c.lt("q₁ᵢ < 1/l", q1_max, 1.0 / l);
                    c.eq("l = (1/n)Σ1/q₁ᵢ − (1/n)Σ1/q₂ᵢ", l, with_n);
                    if (l - with_n).abs() > EQ_TOL && (l - without_n).abs() <= EQ_TOL {
                        diagnostics.push(
                            "coupling fails as stated but holds without the 1/n factor used by the fractional-integral theorems".into(),
                        );
                    }
                }
            }
            if params.n > 1 && (with_n - without_n).abs() > EQ_TOL {
                diagnostics.push(format!(
                    "the two coupling conventions differ here: Σ1/q₁ᵢ − Σ1/q₂ᵢ = {without_n}, (1/n)(Σ1/q₁ᵢ − Σ1/q₂ᵢ) = {with_n}"
                ));
            }
            c.lt("λ − Σ1/q₂ᵢ < α", lambda - s2, alpha);
            c.lt("α < n − Σ1/q₁ᵢ", alpha, n - s1);
        }
    }
    let failed_clauses: Vec<String> =
        c.0.iter()
            .filter(|m| !m.satisfied)
            .map(|m| m.clause.clone())
            .collect();
    let mut caveats = Vec::new();
    if lambda == 0.0 {
        caveats.push(
            "λ = 0: the convergence argument needs λ > 0; this case relies on the Herz-space result".into(),
        );
    }
    Ok(AdmissibilityVerdict {
        theorem,
        admissible: failed_clauses.is_empty(),
        failed_clauses,
        margins: c.0,
        caveats,
        diagnostics,
    })
}

/// Scalar parameters that may vary in a region plot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeAxis {
    Alpha,
    Lambda,
    P,
    P1,
    P2,
    L,
}

impl FreeAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::Alpha => "alpha",
            Self::Lambda => "lambda",
            Self::P => "p",
            Self::P1 => "p1",
            Self::P2 => "p2",
            Self::L => "l",
        }
    }
}

impl FromStr for FreeAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "alpha" => Ok(Self::Alpha),
            "lambda" => Ok(Self::Lambda),
            "p" => Ok(Self::P),
            "p1" => Ok(Self::P1),
            "p2" => Ok(Self::P2),
            "l" => Ok(Self::L),
            _ => Err(Error::Parse(format!("unknown axis `{s}`"))),
        }
    }
}

/// Admissible region of a theorem over a rectangular window in two free
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Region {
    pub theorem: TheoremId,
    pub axes: [FreeAxis; 2],
    pub window: [[f64; 2]; 2],
    /// Convex polygons with counter-clockwise vertices; empty when no point
    /// of the window is admissible.
    pub polygons: Vec<Vec<[f64; 2]>>,
    /// Set when an equality clause depends on the free axes, so the region
    /// has zero area and is reported empty.
    pub degenerate: bool,
}

impl Region {
    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    /// Strict interior test against the polygons.
    pub fn contains(&self, u: f64, v: f64) -> bool {
        self.polygons.iter().any(|poly| {
            let m = poly.len();
            m >= 3
                && (0..m).all(|i| {
                    let a = poly[i];
                    let b = poly[(i + 1) % m];
                    (b[0] - a[0]) * (v - a[1]) - (b[1] - a[1]) * (u - a[0]) > 0.0
                })
        })
    }

    /// `polygon,vertex,<axis1>,<axis2>` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "polygon",
            "vertex",
            self.axes[0].name(),
            self.axes[1].name(),
        ])?;
        for (pi, poly) in self.polygons.iter().enumerate() {
            for (vi, p) in poly.iter().enumerate() {
                w.write_record([
                    pi.to_string(),
                    vi.to_string(),
                    format!("{:?}", p[0]),
                    format!("{:?}", p[1]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Affine form `a·u + b·v + c`.
#[derive(Debug, Clone, Copy)]
struct Affine {
    a: f64,
    b: f64,
    c: f64,
}

impl Affine {
    fn eval(&self, u: f64, v: f64) -> f64 {
        self.a * u + self.b * v + self.c
    }
}

/// Admissible region of `theorem` over `window = [[u_lo, u_hi], [v_lo, v_hi]]`
/// with every parameter except `axes` taken from `fixed`.
pub fn region_boundary(
    theorem: TheoremId,
    fixed: &ExponentParams,
    axes: [FreeAxis; 2],
    window: [[f64; 2]; 2],
) -> Result<Region> {
    if axes[0] == axes[1] {
        return Err(Error::InvalidParameter("free axes must differ".into()));
    }
    for w in window {
        if !(w[0] < w[1] && w[0].is_finite() && w[1].is_finite()) {
            return Err(Error::InvalidParameter(format!("bad window {w:?}")));
        }
    }
    let at = |u: f64, v: f64| -> Result<AdmissibilityVerdict> {
        let mut p = fixed.clone();
        p.set(axes[0], u);
        p.set(axes[1], v);
        check(theorem, &p)
    };
    let [[u0, u1], [v0, v1]] = window;
    let base = at(u0, v0)?;
    let du = at(u1, v0)?;
    let dv = at(u0, v1)?;
    let checks = [
        (u1, v1),
        ((u0 + u1) / 2.0, (v0 + v1) / 2.0),
        (u0 + 0.3 * (u1 - u0), v0 + 0.7 * (v1 - v0)),
        (u0 + 0.9 * (u1 - u0), v0 + 0.2 * (v1 - v0)),
    ]
    .map(|(u, v)| at(u, v).map(|verdict| (u, v, verdict)));
    let checks = checks.into_iter().collect::<Result<Vec<_>>>()?;

    // signed value whose positivity is the clause (equalities: lhs - rhs)
    let mut forms = Vec::with_capacity(base.margins.len());
    for (i, m) in base.margins.iter().enumerate() {
        let value = |v: &AdmissibilityVerdict| v.margins[i].margin;
        if m.kind == ClauseKind::Equality {
            // equalities report -|d|, which is not affine; decide by variation
            let varies = [&du, &dv]
                .iter()
                .chain(checks.iter().map(|(_, _, c)| c).collect::<Vec<_>>().iter())
                .any(|v| (value(v) - value(&base)).abs() > EQ_TOL);
            forms.push((m.kind, None, varies, m.satisfied));
            continue;
        }
        let a = (value(&du) - value(&base)) / (u1 - u0);
        let b = (value(&dv) - value(&base)) / (v1 - v0);
        let form = Affine {
            a,
            b,
            c: value(&base) - a * u0 - b * v0,
        };
        let scale = 1.0
            + value(&base).abs()
            + a.abs() * (u0.abs() + u1.abs())
            + b.abs() * (v0.abs() + v1.abs());
        for (u, v, verdict) in &checks {
            if (form.eval(*u, *v) - verdict.margins[i].margin).abs() > 1e-9 * scale {
                return Err(Error::NonAffineClause(m.clause.clone()));
            }
        }
        forms.push((m.kind, Some(form), false, m.satisfied));
    }

    let empty = |degenerate| Region {
        theorem,
        axes,
        window,
        polygons: Vec::new(),
        degenerate,
    };
    let mut poly = vec![[u0, v0], [u1, v0], [u1, v1], [u0, v1]];
    for (kind, form, varies, satisfied) in forms {
        match (kind, form) {
            (ClauseKind::Equality, _) => {
                if varies {
                    return Ok(empty(true));
                }
                if !satisfied {
                    return Ok(empty(false));
                }
            }
            (_, Some(f)) => {
                if f.a == 0.0 && f.b == 0.0 {
                    let ok = if kind == ClauseKind::Strict {
                        f.c > 0.0
                    } else {
                        f.c >= 0.0
                    };
                    if !ok {
                        return Ok(empty(false));
                    }
                    continue;
                }
                poly = clip(&poly, f);
                if poly.len() < 3 {
                    return Ok(empty(false));
                }
            }
            _ => unreachable!(),
        }
    }
    if polygon_area(&poly) <= 0.0 {
        return Ok(empty(false));
    }
    Ok(Region {
        theorem,
        axes,
        window,
        polygons: vec![poly],
        degenerate: false,
    })
}

/// Sutherland-Hodgman clip of a convex polygon to `f >= 0`.
fn clip(poly: &[[f64; 2]], f: Affine) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let m = poly.len();
    for i in 0..m {
        let p = poly[i];
        let q = poly[(i + 1) % m];
        let fp = f.eval(p[0], p[1]);
        let fq = f.eval(q[0], q[1]);
        if fp >= 0.0 {
            out.push(p);
        }
        if (fp > 0.0 && fq < 0.0) || (fp < 0.0 && fq > 0.0) {
            let t = fp / (fp - fq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out.dedup();
    if out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    let m = poly.len();
    (0..m)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % m];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum::<f64>()
        / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn thm31(alpha: f64) -> ExponentParams {
        ExponentParams::same_space(1, alpha, 1.0, 0.1, 2.0)
    }

    #[test]
    fn same_space_examples() {
        let v = check(TheoremId::Thm3_1, &thm31(0.0)).unwrap();
        assert!(v.admissible, "{v:?}");
        let v = check(TheoremId::Thm3_1, &thm31(0.5)).unwrap();
        assert!(!v.admissible);
        assert_eq!(v.failed_clauses, vec!["α < n(1−(1/n)Σ1/qᵢ)".to_string()]);
        assert_eq!(v.margin("α < n(1−(1/n)Σ1/qᵢ)"), Some(0.0));
        let v = check(TheoremId::Thm3_1, &thm31(-0.4)).unwrap();
        assert_eq!(v.failed_clauses, vec!["−Σ1/qᵢ + λ < α".to_string()]);
        assert!(check(TheoremId::Thm3_1, &thm31(-0.39)).unwrap().admissible);
        assert!(check(TheoremId::Thm3_1, &thm31(0.49)).unwrap().admissible);
    }

    #[test]
    fn fractional_examples() {
        let p = ExponentParams::two_space(1, 0.0, 1.0, 2.0, 0.1, 2.0, 4.0, 0.25);
        let v = check(TheoremId::Thm3_2, &p).unwrap();
        assert!(v.admissible, "{v:?}");
        let bad = ExponentParams {
            l: Some(0.5),
            ..p.clone()
        };
        let v = check(TheoremId::Thm3_2, &bad).unwrap();
        assert!(v
            .failed_clauses
            .contains(&"l = Σ1/q₁ᵢ − Σ1/q₂ᵢ".to_string()));
        // alpha window (lambda - 1/4, 1/2)
        for (a, ok) in [(-0.15, false), (-0.14, true), (0.49, true), (0.5, false)] {
            let q = ExponentParams {
                alpha: Some(a),
                ..p.clone()
            };
            assert_eq!(check(TheoremId::Thm3_2, &q).unwrap().admissible, ok, "{a}");
        }
    }

    #[test]
    fn commutator_fractional_coupling() {
        // 1/l = 1/2 - 1/4 with l = 4, and q1 = 2 < l
        let p = ExponentParams::two_space(1, 0.0, 1.0, 2.0, 0.1, 2.0, 4.0, 4.0);
        assert!(check(TheoremId::Thm4_2, &p).unwrap().admissible);
        // n = 2: Σ1/q1 - Σ1/q2 = 2/3, with 1/n it is 1/3
        let p2 = ExponentParams::two_space(2, 0.0, 1.0, 2.0, 0.1, 1.2, 2.0, 2.0 / 3.0);
        let v = check(TheoremId::Thm3_2, &p2).unwrap();
        assert!(v.admissible, "{v:?}");
        assert!(!v.diagnostics.is_empty());
        let v = check(TheoremId::Thm4_4CommutatorFractional, &p2).unwrap();
        assert!(!v.admissible);
        assert!(v.diagnostics.iter().any(|d| d.contains("without the 1/n")));
    }

    #[test]
    fn missing_and_caveat() {
        let mut p = thm31(0.0);
        p.alpha = None;
        assert!(matches!(
            check(TheoremId::Thm3_1, &p),
            Err(Error::MissingParameter("alpha"))
        ));
        let p = ExponentParams::same_space(1, 0.0, 1.0, 0.0, 2.0);
        let v = check(TheoremId::Thm3_1, &p).unwrap();
        assert!(v.admissible);
        assert_eq!(v.caveats.len(), 1);
        let p = ExponentParams::same_space(1, 0.0, 1.0, 0.0, 2.0);
        assert!(matches!(
            check(TheoremId::Thm3_2, &p),
            Err(Error::MissingParameter(_))
        ));
    }

    #[test]
    fn names_round_trip() {
        for t in TheoremId::ALL {
            assert_eq!(t.name().parse::<TheoremId>().unwrap(), t);
            let json = serde_json::to_string(&t).unwrap();
            assert_eq!(json, format!("\"{}\"", t.name()));
        }
        assert!("thm9".parse::<TheoremId>().is_err());
    }

    #[test]
    fn region_thm31_alpha_lambda() {
        let fixed = ExponentParams::same_space(1, 0.0, 1.0, 0.0, 2.0);
        let r = region_boundary(
            TheoremId::Thm3_1,
            &fixed,
            [FreeAxis::Alpha, FreeAxis::Lambda],
            [[-1.0, 1.0], [0.0, 1.0]],
        )
        .unwrap();
        assert_eq!(r.polygons.len(), 1);
        let poly = &r.polygons[0];
        // bounded by alpha = lambda - 1/2, alpha = 1/2 and lambda = 0
        let mut sorted = poly.clone();
        sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        assert_eq!(sorted, vec![[-0.5, 0.0], [0.5, 0.0], [0.5, 1.0]]);
        assert!(r.contains(0.4, 0.5));
        assert!(!r.contains(-0.2, 0.5));
    }

    #[test]
    fn region_outside_and_degenerate() {
        let fixed = ExponentParams::same_space(1, 0.0, 1.0, 0.0, 2.0);
        let r = region_boundary(
            TheoremId::Thm3_1,
            &fixed,
            [FreeAxis::Alpha, FreeAxis::Lambda],
            [[2.0, 3.0], [0.0, 1.0]],
        )
        .unwrap();
        assert!(r.is_empty());
        let fixed = ExponentParams::two_space(1, 0.0, 1.0, 2.0, 0.1, 2.0, 4.0, 0.25);
        let r = region_boundary(
            TheoremId::Thm3_2,
            &fixed,
            [FreeAxis::Alpha, FreeAxis::L],
            [[-1.0, 1.0], [0.1, 0.9]],
        );
        assert!(matches!(r, Err(Error::NonAffineClause(_))));
        let r = region_boundary(
            TheoremId::Thm4_2,
            &ExponentParams::two_space(1, 0.0, 1.0, 2.0, 0.1, 2.0, 4.0, 4.0),
            [FreeAxis::Alpha, FreeAxis::P2],
            [[-1.0, 1.0], [0.5, 3.0]],
        )
        .unwrap();
        assert!(!r.is_empty());
        assert!(r.contains(0.0, 2.0));
        assert!(!r.contains(0.0, 0.9));
    }

    #[test]
    fn region_csv_layout() {
        let fixed = ExponentParams::same_space(1, 0.0, 1.0, 0.0, 2.0);
        let r = region_boundary(
            TheoremId::Thm3_1,
            &fixed,
            [FreeAxis::Alpha, FreeAxis::Lambda],
            [[-1.0, 1.0], [0.0, 1.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("polygon,vertex,alpha,lambda\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
