//! Maximal-type operators, the Riesz potential, the BMO seminorm and the
//! size-condition verifier.
//!
//! Every maximal-type operator is a maximum over a finite radius set of
//!
//! ```text
//! N(|B(x,r)|) · ∫_{B(x,r)} w(x, y) |f(y)| dy
//! ```
//!
//! where the integral is a sum over grid cells weighted by the volume of
//! `cell ∩ B(x,r)` and `N` is either `1/|B|` or a power of `|B|`. Balls that
//! leave the grid are clipped but still normalized by their full volume.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{euclidean_norm, pow2, Grid, GridFunction};

/// Subcells per axis used to estimate the overlap of a ball with a cell it
/// only partly covers (n >= 2).
const SUBSAMPLES: usize = 8;

/// Volume of the Euclidean ball of radius `r` in `R^n`.
pub fn ball_volume(n: usize, r: f64) -> f64 {
    match n {
        1 => 2.0 * r,
        2 => PI * r * r,
        _ => 4.0 / 3.0 * PI * r * r * r,
    }
}

/// Surface measure of the unit sphere in `R^n`.
fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 4.0 * PI,
    }
}

/// Sorted, deduplicated set of positive radii approximating `sup_{r > 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusSet(Vec<f64>);

impl RadiusSet {
    pub fn new(mut radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::EmptyRadiusSet);
        }
        if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidRadius(r));
        }
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        Ok(Self(radii))
    }

    /// Geometric radii `r0 · 2^(i/per_octave)` for `i = 0, 1, ..` up to the
    /// first one reaching `r_max`. Every `per_octave`-th radius is an exact
    /// power-of-two multiple of `r0`.
    pub fn geometric(r0: f64, r_max: f64, per_octave: usize) -> Result<Self> {
        if per_octave == 0 {
            return Err(Error::InvalidParameter(
                "radii per octave must be positive".into(),
            ));
        }
        if !(r0 > 0.0 && r0.is_finite()) {
            return Err(Error::InvalidRadius(r0));
        }
        if !(r_max.is_finite()) {
            return Err(Error::InvalidRadius(r_max));
        }
        let mut radii = Vec::new();
        let mut i = 0usize;
        loop {
            let octave = (i / per_octave) as i32;
            let frac = (i % per_octave) as f64 / per_octave as f64;
            let r = r0 * pow2(octave) * frac.exp2();
            radii.push(r);
            if r >= r_max {
                break;
            }
            i += 1;
        }
        Self::new(radii)
    }

    /// Four radii per octave from half the finest cell width up to the
    /// grid diameter.
    pub fn default_for(grid: &Grid) -> Self {
        Self::geometric(grid.min_cell_width() / 2.0, grid.diameter(), 4)
            .expect("grid widths are positive")
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A symbol `b` for the commutators, optionally with an exact evaluator used
/// away from the grid samples.
#[derive(Debug, Clone)]
pub struct BmoSymbol {
    pub b: GridFunction,
    pub seminorm_estimate: Option<f64>,
    exact: Option<fn(&[f64]) -> f64>,
}

fn log_abs(x: &[f64]) -> f64 {
    euclidean_norm(x).ln()
}

impl BmoSymbol {
    pub fn new(b: GridFunction) -> Self {
        Self {
            b,
            seminorm_estimate: None,
            exact: None,
        }
    }

    /// `b(x) = log|x|`, finite on every dyadic grid since the origin is
    /// never a sample.
    pub fn log_abs(grid: &std::sync::Arc<Grid>) -> Result<Self> {
        let b = crate::grid::sample(grid, log_abs)?;
        Ok(Self {
            b,
            seminorm_estimate: None,
            exact: Some(log_abs),
        })
    }

    pub fn constant(grid: &std::sync::Arc<Grid>, c: f64) -> Result<Self> {
        Ok(Self::new(crate::grid::sample(grid, |_| c)?))
    }

    /// Value at an arbitrary point: the exact evaluator when there is one,
    /// otherwise the value of the containing cell.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.exact {
            Some(e) => e(x),
            None => self.b.value_at(x),
        }
    }

    /// Fills `seminorm_estimate` from a cube family.
    pub fn with_seminorm(mut self, cubes: &[Cube]) -> Result<Self> {
        self.seminorm_estimate = Some(bmo_seminorm(&self.b, cubes)?);
        Ok(self)
    }

    pub fn sup_abs(&self) -> f64 {
        self.b.max_abs()
    }
}

/// The five operators.
#[derive(Debug, Clone)]
pub enum OperatorKind {
    HlMaximal,
    FractionalMaximal { l: f64 },
    RieszPotential { l: f64 },
    CommutatorMb { symbol: BmoSymbol },
    CommutatorMbl { l: f64, symbol: BmoSymbol },
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::HlMaximal => "hl_maximal",
            Self::FractionalMaximal { .. } => "fractional_maximal",
            Self::RieszPotential { .. } => "riesz",
            Self::CommutatorMb { .. } => "mb",
            Self::CommutatorMbl { .. } => "mbl",
        }
    }
}

/// Normalization of a ball integral.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Normalization {
    /// `sum / |B|`
    Average,
    /// `sum · |B|^e`
    Power(f64),
}

impl Normalization {
    fn apply(self, sum: f64, n: usize, r: f64) -> f64 {
        match self {
            Self::Average => sum / ball_volume(n, r),
            Self::Power(e) => sum * ball_volume(n, r).powf(e),
        }
    }
}

/// An operator together with its radius set.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    /// Radii for maximal-type kinds; `None` means [`RadiusSet::default_for`].
    pub radii: Option<RadiusSet>,
}

impl OperatorSpec {
    pub fn new(kind: OperatorKind) -> Self {
        Self { kind, radii: None }
    }

    pub fn with_radii(kind: OperatorKind, radii: RadiusSet) -> Self {
        Self {
            kind,
            radii: Some(radii),
        }
    }

    /// Checks the order constraints for dimension `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let nf = n as f64;
        match &self.kind {
            OperatorKind::HlMaximal | OperatorKind::CommutatorMb { .. } => Ok(()),
            OperatorKind::FractionalMaximal { l } => {
                if (0.0..nf).contains(l) {
                    Ok(())
                } else {
                    Err(Error::InvalidOrder(format!(
                        "fractional maximal needs 0 <= l < {n}, got {l}"
                    )))
                }
            }
            OperatorKind::RieszPotential { l } => {
                if *l > 0.0 && *l < nf {
                    Ok(())
                } else {
                    Err(Error::InvalidOrder(format!(
                        "Riesz potential needs 0 < l < {n}, got {l}"
                    )))
                }
            }
            OperatorKind::CommutatorMbl { l, .. } => {
                if *l > 1.0 && l.is_finite() {
                    Ok(())
                } else {
                    Err(Error::InvalidOrder(format!(
                        "M_b^l needs 1 < l < inf, got {l}"
                    )))
                }
            }
        }
    }

    /// Order `l` such that the operator behaves like `|x|^(l - n)` far from
    /// the support: 0 for the non-fractional kinds, `n/l` for `M_b^l`.
    pub fn fractional_order(&self, n: usize) -> f64 {
        match &self.kind {
            OperatorKind::HlMaximal | OperatorKind::CommutatorMb { .. } => 0.0,
            OperatorKind::FractionalMaximal { l } | OperatorKind::RieszPotential { l } => *l,
            OperatorKind::CommutatorMbl { l, .. } => n as f64 / l,
        }
    }

    fn radius_set(&self, grid: &Grid) -> RadiusSet {
        self.radii
            .clone()
            .unwrap_or_else(|| RadiusSet::default_for(grid))
    }

    fn symbol(&self) -> Option<&BmoSymbol> {
        match &self.kind {
            OperatorKind::CommutatorMb { symbol } | OperatorKind::CommutatorMbl { symbol, .. } => {
                Some(symbol)
            }
            _ => None,
        }
    }

    fn normalization(&self, n: usize) -> Normalization {
        match &self.kind {
            OperatorKind::FractionalMaximal { l } if *l > 0.0 => {
                Normalization::Power(l / n as f64 - 1.0)
            }
            OperatorKind::CommutatorMbl { l, .. } => Normalization::Power(1.0 / l - 1.0),
            _ => Normalization::Average,
        }
    }

    /// Applies the operator at every grid point.
    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        let grid = f.grid();
        self.validate(grid.dim())?;
        if let Some(s) = self.symbol() {
            if !s.b.same_grid(f) {
                return Err(Error::GridMismatch);
            }
        }
        if let OperatorKind::RieszPotential { l } = self.kind {
            return riesz_apply(f, l);
        }
        let radii = self.radius_set(grid);
        let norm = self.normalization(grid.dim());
        let symbol = self.symbol();
        let values: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let x = grid.point(i);
                let bx = symbol.map(|s| s.b.as_slice()[i]);
                maximal_at(f, &x, bx, symbol, &radii, norm)
            })
            .collect();
        GridFunction::from_vec(grid.clone(), values)
    }

    /// Value of `Tf` at an arbitrary point `x`, inside or outside the grid.
    pub fn eval_at(&self, f: &GridFunction, x: &[f64]) -> Result<f64> {
        let grid = f.grid();
        self.validate(grid.dim())?;
        if x.len() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: x.len(),
            });
        }
        if let OperatorKind::RieszPotential { l } = self.kind {
            return Ok(riesz_at(f, l, x, grid.locate(x)));
        }
        let symbol = self.symbol();
        if let Some(s) = symbol {
            if !s.b.same_grid(f) {
                return Err(Error::GridMismatch);
            }
        }
        let radii = self.radius_set(grid);
        let bx = symbol.map(|s| s.eval(x));
        Ok(maximal_at(
            f,
            x,
            bx,
            symbol,
            &radii,
            self.normalization(grid.dim()),
        ))
    }
}

/// Maximum over radii of the normalized ball integral of `w(x,y)|f(y)|`.
fn maximal_at(
    f: &GridFunction,
    x: &[f64],
    bx: Option<f64>,
    symbol: Option<&BmoSymbol>,
    radii: &RadiusSet,
    norm: Normalization,
) -> f64 {
    let fv = f.as_slice();
    let n = f.dim();
    let integrand = |j: usize| -> f64 {
        let v = fv[j].abs();
        match (bx, symbol) {
            (Some(bx), Some(s)) => (bx - s.b.as_slice()[j]).abs() * v,
            _ => v,
        }
    };
    let mut best = 0.0f64;
    for &r in radii.as_slice() {
        let sum = ball_integral(f.grid(), x, r, &integrand);
        best = best.max(norm.apply(sum, n, r));
    }
    best
}

/// `Σ_cells g(cell) · |cell ∩ B(x,r)|`.
pub fn ball_integral<G: Fn(usize) -> f64>(grid: &Grid, x: &[f64], r: f64, g: &G) -> f64 {
    if grid.dim() == 1 {
        let axis = grid.axis(0);
        let edges = axis.edges();
        let (lo, hi) = (x[0] - r, x[0] + r);
        let mut s = 0.0;
        for i in axis.window(lo, hi) {
            let ov = hi.min(edges[i + 1]) - lo.max(edges[i]);
            if ov > 0.0 {
                s += g(i) * ov;
            }
        }
        return s;
    }
    let n = grid.dim();
    let ranges: Vec<_> = (0..n)
        .map(|d| grid.axis(d).window(x[d] - r, x[d] + r))
        .collect();
    if ranges.iter().any(|w| w.is_empty()) {
        return 0.0;
    }
    let mut idx: Vec<usize> = ranges.iter().map(|w| w.start).collect();
    let mut s = 0.0;
    loop {
        let flat = grid.flat_index(&idx);
        let v = g(flat);
        if v != 0.0 {
            let ov = box_ball_overlap(grid, &idx, x, r);
            if ov > 0.0 {
                s += v * ov;
            }
        }
        // advance the multi-index, last axis fastest
        let mut d = n;
        loop {
            if d == 0 {
                return s;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < ranges[d].end {
                break;
            }
            idx[d] = ranges[d].start;
        }
    }
}

/// Volume of `cell ∩ B(x,r)` for the cell with multi-index `idx` (n >= 2).
fn box_ball_overlap(grid: &Grid, idx: &[usize], x: &[f64], r: f64) -> f64 {
    let n = grid.dim();
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    let mut near = 0.0;
    let mut far = 0.0;
    let mut ball_inside = true;
    for d in 0..n {
        let e = grid.axis(d).edges();
        lo[d] = e[idx[d]];
        hi[d] = e[idx[d] + 1];
        let dn = (lo[d] - x[d]).max(0.0).max(x[d] - hi[d]);
        let df = (x[d] - lo[d]).abs().max((hi[d] - x[d]).abs());
        near += dn * dn;
        far += df * df;
        if x[d] - r < lo[d] || x[d] + r > hi[d] {
            ball_inside = false;
        }
    }
    let r2 = r * r;
    let vol: f64 = (0..n).map(|d| hi[d] - lo[d]).product();
    if far <= r2 {
        return vol;
    }
    if near >= r2 {
        return 0.0;
    }
    if ball_inside {
        return ball_volume(n, r);
    }
    let m = SUBSAMPLES;
    let total = m.pow(n as u32);
    let mut inside = 0usize;
    let mut sub = [0usize; 3];
    for _ in 0..total {
        let mut d2 = 0.0;
        for d in 0..n {
            let y = lo[d] + (hi[d] - lo[d]) * (sub[d] as f64 + 0.5) / m as f64;
            d2 += (y - x[d]) * (y - x[d]);
        }
        if d2 <= r2 {
            inside += 1;
        }
        for s in sub.iter_mut().take(n) {
            *s += 1;
            if *s < m {
                break;
            }
            *s = 0;
        }
    }
    vol * inside as f64 / total as f64
}

/// Hardy-Littlewood maximal function over `radii`.
pub fn hl_maximal(f: &GridFunction, radii: &RadiusSet) -> Result<GridFunction> {
    OperatorSpec::with_radii(OperatorKind::HlMaximal, radii.clone()).apply(f)
}

/// Fractional maximal function with normalization `|B|^(l/n - 1)`.
pub fn fractional_maximal(f: &GridFunction, l: f64, radii: &RadiusSet) -> Result<GridFunction> {
    OperatorSpec::with_radii(OperatorKind::FractionalMaximal { l }, radii.clone()).apply(f)
}

/// `M_b f`.
pub fn commutator_mb(f: &GridFunction, b: &BmoSymbol, radii: &RadiusSet) -> Result<GridFunction> {
    OperatorSpec::with_radii(
        OperatorKind::CommutatorMb { symbol: b.clone() },
        radii.clone(),
    )
    .apply(f)
}

/// `M_b^l f` with normalization `|B|^(-1/l')`.
pub fn commutator_mbl(
    f: &GridFunction,
    b: &BmoSymbol,
    l: f64,
    radii: &RadiusSet,
) -> Result<GridFunction> {
    OperatorSpec::with_radii(
        OperatorKind::CommutatorMbl {
            l,
            symbol: b.clone(),
        },
        radii.clone(),
    )
    .apply(f)
}

/// Riesz potential `I_l f(x) = ∫ |x - y|^(l - n) f(y) dy`.
pub fn riesz_potential(f: &GridFunction, l: f64) -> Result<GridFunction> {
    OperatorSpec::new(OperatorKind::RieszPotential { l }).apply(f)
}

fn riesz_apply(f: &GridFunction, l: f64) -> Result<GridFunction> {
    let grid = f.grid();
    let values: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| riesz_at(f, l, &grid.point(i), Some(i)))
        .collect();
    GridFunction::from_vec(grid.clone(), values)
}

fn riesz_at(f: &GridFunction, l: f64, x: &[f64], self_cell: Option<usize>) -> f64 {
    let grid = f.grid();
    let n = grid.dim();
    let e = l - n as f64;
    let mut y = vec![0.0; n];
    let mut s = 0.0;
    for (j, &v) in f.as_slice().iter().enumerate() {
        if v == 0.0 {
            continue;
        }
        if Some(j) == self_cell {
            s += v * self_cell_integral(grid, j, x, l);
            continue;
        }
        grid.point_into(j, &mut y);
        let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        let kernel = if n == 1 {
            d2.sqrt().powf(e)
        } else {
            d2.powf(e / 2.0)
        };
        s += v * kernel * grid.cell_volume(j);
    }
    s
}

/// `∫_cell |x - y|^(l - n) dy` for `x` inside the cell.
fn self_cell_integral(grid: &Grid, j: usize, x: &[f64], l: f64) -> f64 {
    let n = grid.dim();
    let (lo, hi) = grid.cell_bounds(j);
    if n == 1 {
        let a = (x[0] - lo[0]).max(0.0);
        let b = (hi[0] - x[0]).max(0.0);
        return (a.powf(l) + b.powf(l)) / l;
    }
    // inscribed ball around x in closed form, subsampled remainder
    let rho = (0..n)
        .map(|d| (x[d] - lo[d]).min(hi[d] - x[d]))
        .fold(f64::INFINITY, f64::min)
        .max(0.0);
    let inner = sphere_area(n) * rho.powf(l) / l;
    let e = l - n as f64;
    let m = SUBSAMPLES;
    let total = m.pow(n as u32);
    let sub_vol: f64 = (0..n).map(|d| (hi[d] - lo[d]) / m as f64).product();
    let mut outer = 0.0;
    let mut sub = [0usize; 3];
    for _ in 0..total {
        let mut d2 = 0.0;
        for d in 0..n {
            let y = lo[d] + (hi[d] - lo[d]) * (sub[d] as f64 + 0.5) / m as f64;
            d2 += (y - x[d]) * (y - x[d]);
        }
        if d2 > rho * rho {
            outer += d2.powf(e / 2.0) * sub_vol;
        }
        for s in sub.iter_mut().take(n) {
            *s += 1;
            if *s < m {
                break;
            }
            *s = 0;
        }
    }
    inner + outer
}

/// Axis-aligned cube `center ± side/2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub side: f64,
}

impl Cube {
    pub fn new(center: Vec<f64>, side: f64) -> Self {
        Self { center, side }
    }

    fn bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let h = self.side / 2.0;
        (
            self.center.iter().map(|c| c - h).collect(),
            self.center.iter().map(|c| c + h).collect(),
        )
    }
}

/// Cubes of side `2^(j/per_octave)` for every `j` with side in
/// `[min_side, max_side]`, centered on the lattice of step `side/2`, keeping
/// those inside the grid. Larger `per_octave` refines the family.
pub fn cube_family(grid: &Grid, min_side: f64, max_side: f64, per_octave: usize) -> Vec<Cube> {
    let n = grid.dim();
    let per_octave = per_octave.max(1) as f64;
    let j_lo = (min_side.log2() * per_octave).ceil() as i64;
    let j_hi = (max_side.log2() * per_octave).floor() as i64;
    let mut cubes = Vec::new();
    for j in j_lo..=j_hi {
        let side = (j as f64 / per_octave).exp2();
        let step = side / 2.0;
        let per_axis: Vec<Vec<f64>> = (0..n)
            .map(|d| {
                let a = grid.axis(d);
                let lo = a.lower() + side / 2.0;
                let hi = a.upper() - side / 2.0;
                let i0 = (lo / step).ceil() as i64;
                let i1 = (hi / step).floor() as i64;
                (i0..=i1).map(|i| i as f64 * step).collect()
            })
            .collect();
        if per_axis.iter().any(Vec::is_empty) {
            continue;
        }
        let mut idx = vec![0usize; n];
        'outer: loop {
            let center: Vec<f64> = (0..n).map(|d| per_axis[d][idx[d]]).collect();
            cubes.push(Cube::new(center, side));
            let mut d = n;
            loop {
                if d == 0 {
                    break 'outer;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < per_axis[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }
    cubes
}

/// `max_Q |Q|^(-1) ∫_Q |b - mean_Q b|` with exact cell/cube overlaps.
pub fn bmo_seminorm(b: &GridFunction, cubes: &[Cube]) -> Result<f64> {
    if cubes.is_empty() {
        return Err(Error::EmptyCubeFamily);
    }
    let grid = b.grid();
    for q in cubes {
        if q.center.len() != grid.dim() {
            return Err(Error::DimensionMismatch {
                expected: grid.dim(),
                found: q.center.len(),
            });
        }
        let (lo, hi) = q.bounds();
        if !(q.side > 0.0) || !grid.contains_box(&lo, &hi) {
            return Err(Error::CubeOutsideGrid {
                center: q.center.clone(),
                side: q.side,
            });
        }
    }
    let osc: Vec<f64> = cubes.par_iter().map(|q| cube_oscillation(b, q)).collect();
    Ok(osc.into_iter().fold(0.0, f64::max))
}

fn cube_oscillation(b: &GridFunction, q: &Cube) -> f64 {
    let grid = b.grid();
    let n = grid.dim();
    let (lo, hi) = q.bounds();
    // per-axis (cell index, overlap length)
    let parts: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|d| {
            let e = grid.axis(d).edges();
            grid.axis(d)
                .window(lo[d], hi[d])
                .map(|i| (i, hi[d].min(e[i + 1]) - lo[d].max(e[i])))
                .filter(|&(_, w)| w > 0.0)
                .collect()
        })
        .collect();
    let mut cells = Vec::new();
    let mut idx = vec![0usize; n];
    if parts.iter().any(Vec::is_empty) {
        return 0.0;
    }
    'outer: loop {
        let multi: Vec<usize> = (0..n).map(|d| parts[d][idx[d]].0).collect();
        let w: f64 = (0..n).map(|d| parts[d][idx[d]].1).product();
        cells.push((b.as_slice()[grid.flat_index(&multi)], w));
        let mut d = n;
        loop {
            if d == 0 {
                break 'outer;
            }
            d -= 1;
            idx[d] += 1;
            if idx[d] < parts[d].len() {
                break;
            }
            idx[d] = 0;
        }
    }
    let vol: f64 = cells.iter().map(|c| c.1).sum();
    // shifted by the first value so that constants give zero exactly
    let v0 = cells[0].0;
    let mean = v0 + cells.iter().map(|(v, w)| (v - v0) * w).sum::<f64>() / vol;
    cells.iter().map(|(v, w)| (v - mean).abs() * w).sum::<f64>() / vol
}

/// Zone of a probe point relative to the annulus `A_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeZone {
    /// `|x| >= 2^(j+1)`
    Far,
    /// `|x| <= 2^(j-2)`
    Near,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeValue {
    pub point: Vec<f64>,
    pub zone: ProbeZone,
    pub value: f64,
}

/// Empirical constant of a size condition.
#[derive(Debug, Clone, Serialize)]
pub struct SizeConstant {
    pub constant: f64,
    pub probes: Vec<ProbeValue>,
    /// Set when `f = 0`; the constant is then 0 by convention.
    pub degenerate: bool,
}

impl SizeConstant {
    /// `(max - min) / max` of the per-probe values.
    pub fn variation(&self) -> f64 {
        let max = self.probes.iter().map(|p| p.value).fold(0.0, f64::max);
        let min = self
            .probes
            .iter()
            .map(|p| p.value)
            .fold(f64::INFINITY, f64::min);
        if max == 0.0 {
            0.0
        } else {
            (max - min) / max
        }
    }
}

/// Classifies a probe point against `A_j`.
pub fn probe_zone(x: &[f64], j: i32) -> Result<ProbeZone> {
    let r = euclidean_norm(x);
    if r >= pow2(j + 1) {
        Ok(ProbeZone::Far)
    } else if r <= pow2(j - 2) {
        Ok(ProbeZone::Near)
    } else {
        Err(Error::ProbeInExcludedZone {
            point: x.to_vec(),
            j,
        })
    }
}

/// Largest value over the probes of `|Tf(x)| |x|^(n-l) / ||f||_1` (far
/// zone) or `|Tf(x)| 2^(j(n-l)) / ||f||_1` (near zone), for `f` supported
/// in `A_j`.
pub fn verify_size_condition(
    op: &OperatorSpec,
    j: i32,
    f: &GridFunction,
    probes: &[Vec<f64>],
) -> Result<SizeConstant> {
    let grid = f.grid();
    let n = grid.dim();
    if probes.is_empty() {
        return Err(Error::InvalidProbe("no probe points".into()));
    }
    let zones = probes
        .iter()
        .map(|p| {
            if p.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: p.len(),
                });
            }
            probe_zone(p, j)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut x = vec![0.0; n];
    for (i, &v) in f.as_slice().iter().enumerate() {
        if v != 0.0 {
            grid.point_into(i, &mut x);
            let r = euclidean_norm(&x);
            if !(r >= pow2(j - 1) && r < pow2(j)) {
                return Err(Error::NotSupportedInAnnulus(j));
            }
        }
    }
    let l1 = f.l1_norm();
    if l1 == 0.0 {
        return Ok(SizeConstant {
            constant: 0.0,
            probes: probes
                .iter()
                .zip(&zones)
                .map(|(p, &zone)| ProbeValue {
                    point: p.clone(),
                    zone,
                    value: 0.0,
                })
                .collect(),
            degenerate: true,
        });
    }
    let decay = n as f64 - op.fractional_order(n);
    let values = probes
        .iter()
        .zip(&zones)
        .map(|(p, &zone)| {
            let t = op.eval_at(f, p)?.abs();
            let weight = match zone {
                ProbeZone::Far => euclidean_norm(p).powf(decay),
                ProbeZone::Near => (j as f64 * decay).exp2(),
            };
            Ok(ProbeValue {
                point: p.clone(),
                zone,
                value: t * weight / l1,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let constant = values.iter().map(|p| p.value).fold(0.0, f64::max);
    Ok(SizeConstant {
        constant,
        probes: values,
        degenerate: false,
    })
}
