//! Tensor grids over R^n, sampled functions, and the dyadic annulus
//! decomposition `A_k = {2^(k-1) <= |x| < 2^k}`.
//!
//! Every axis is a contiguous list of midpoint-rule cells. Dyadic grids use
//! cells that are uniform inside each octave `[2^(k-1), 2^k)` and mirrored
//! under `x -> -x`, so the origin is always a cell edge and never a sample.

use std::io::{BufRead, Write};
use std::ops::Range;
use std::sync::Arc;

use ndarray::{ArrayD, IxDyn};

use crate::error::{Error, Result};

/// Largest number of samples a grid may hold.
pub const MAX_GRID_SAMPLES: usize = 1 << 26;

/// Per-sample boolean selection over a grid.
pub type Mask = ArrayD<bool>;

#[derive(Debug, Clone)]
pub struct AxisGrid {
    points: Vec<f64>,
    widths: Vec<f64>,
    edges: Vec<f64>,
}

// Edges are derived data; two axes are equal when their cells are.
impl PartialEq for AxisGrid {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.widths == other.widths
    }
}

impl AxisGrid {
    /// Builds an axis from strictly increasing cell edges.
    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::InvalidAxis("an axis needs at least one cell".into()));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidAxis("non-finite edge".into()));
        }
        let mut points = Vec::with_capacity(edges.len() - 1);
        let mut widths = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            let width = w[1] - w[0];
            if width <= 0.0 {
                return Err(Error::InvalidAxis(
                    "edges must be strictly increasing".into(),
                ));
            }
            points.push(0.5 * (w[0] + w[1]));
            widths.push(width);
        }
        let axis = Self {
            points,
            widths,
            edges,
        };
        axis.validate()?;
        Ok(axis)
    }

    /// Builds an axis from cell midpoints and widths. Cells must tile an
    /// interval without gaps.
    pub fn new(points: Vec<f64>, widths: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != widths.len() {
            return Err(Error::InvalidAxis(format!(
                "{} points but {} widths",
                points.len(),
                widths.len()
            )));
        }
        let mut edges = Vec::with_capacity(points.len() + 1);
        edges.push(points[0] - 0.5 * widths[0]);
        for i in 0..points.len() {
            let upper = points[i] + 0.5 * widths[i];
            if i + 1 < points.len() {
                let next_lower = points[i + 1] - 0.5 * widths[i + 1];
                let scale = upper.abs().max(widths[i]).max(widths[i + 1]);
                if (upper - next_lower).abs() > 1e-9 * scale {
                    return Err(Error::InvalidAxis(format!(
                        "cells {i} and {} do not touch ({upper} vs {next_lower})",
                        i + 1
                    )));
                }
            }
            edges.push(upper);
        }
        let axis = Self {
            points,
            widths,
            edges,
        };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<()> {
        if self.points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidAxis(
                "points must be strictly increasing".into(),
            ));
        }
        if self.widths.iter().any(|&w| !(w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidAxis("cell widths must be positive".into()));
        }
        let total: f64 = self.widths.iter().sum();
        let span = self.span();
        if (total - span).abs() > 1e-12 * span {
            return Err(Error::InvalidAxis(format!(
                "cell widths sum to {total}, covered interval has length {span}"
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn lower(&self) -> f64 {
        self.edges[0]
    }

    pub fn upper(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    pub fn span(&self) -> f64 {
        self.upper() - self.lower()
    }

    /// Index of the cell `[a, b)` containing `x`; the last cell also owns its
    /// upper edge.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if !(x >= self.lower() && x <= self.upper()) {
            return None;
        }
        let idx = self.edges.partition_point(|&e| e <= x);
        Some(idx.saturating_sub(1).min(self.len() - 1))
    }

    /// Cells whose interior meets the open interval `(lo, hi)`.
    pub fn window(&self, lo: f64, hi: f64) -> Range<usize> {
        // first cell whose upper edge lies strictly above lo
        let start = self.edges[1..].partition_point(|&e| e <= lo);
        // one past the last cell whose lower edge lies strictly below hi
        let end = self.edges[..self.len()].partition_point(|&e| e < hi);
        start..end.max(start)
    }
}

/// Tensor product of one to three axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<AxisGrid>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(axes: Vec<AxisGrid>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::UnsupportedDimension(axes.len()));
        }
        let shape: Vec<usize> = axes.iter().map(AxisGrid::len).collect();
        let len = shape
            .iter()
            .try_fold(1usize, |acc, &s| acc.checked_mul(s))
            .filter(|&l| l <= MAX_GRID_SAMPLES)
            .ok_or(Error::GridTooLarge(usize::MAX))?;
        let mut strides = vec![1; shape.len()];
        for i in (0..shape.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * shape[i + 1];
        }
        Ok(Self {
            axes,
            shape,
            strides,
            len,
        })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[AxisGrid] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &AxisGrid {
        &self.axes[i]
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn multi_index(&self, flat: usize, out: &mut [usize]) {
        let mut rem = flat;
        for (o, &s) in out.iter_mut().zip(&self.strides) {
            *o = rem / s;
            rem %= s;
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn point_into(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for (d, (o, &s)) in out.iter_mut().zip(&self.strides).enumerate() {
            *o = self.axes[d].points[rem / s];
            rem %= s;
        }
    }

    /// Coordinates of sample `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut p = vec![0.0; self.dim()];
        self.point_into(flat, &mut p);
        p
    }

    pub fn cell_volume(&self, flat: usize) -> f64 {
        let mut rem = flat;
        let mut vol = 1.0;
        for (d, &s) in self.strides.iter().enumerate() {
            vol *= self.axes[d].widths[rem / s];
            rem %= s;
        }
        vol
    }

    /// Lower and upper corner of the cell around sample `flat`.
    pub fn cell_bounds(&self, flat: usize) -> (Vec<f64>, Vec<f64>) {
        let mut idx = vec![0; self.dim()];
        self.multi_index(flat, &mut idx);
        let lo = idx
            .iter()
            .enumerate()
            .map(|(d, &i)| self.axes[d].edges[i])
            .collect();
        let hi = idx
            .iter()
            .enumerate()
            .map(|(d, &i)| self.axes[d].edges[i + 1])
            .collect();
        (lo, hi)
    }

    /// Sample whose cell contains `x`.
    pub fn locate(&self, x: &[f64]) -> Option<usize> {
        if x.len() != self.dim() {
            return None;
        }
        let mut flat = 0;
        for (d, &xi) in x.iter().enumerate() {
            flat += self.axes[d].locate(xi)? * self.strides[d];
        }
        Some(flat)
    }

    pub fn contains_box(&self, lo: &[f64], hi: &[f64]) -> bool {
        self.axes
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(a, (&l, &h))| l >= a.lower() && h <= a.upper())
    }

    pub fn total_volume(&self) -> f64 {
        self.axes.iter().map(AxisGrid::span).product()
    }

    /// Largest Euclidean distance between two points of the grid box.
    pub fn diameter(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.span() * a.span())
            .sum::<f64>()
            .sqrt()
    }

    pub fn min_cell_width(&self) -> f64 {
        self.axes
            .iter()
            .flat_map(|a| a.widths.iter().copied())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Real-valued samples on a grid, one per cell midpoint.
#[derive(Debug, Clone)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: ArrayD<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: ArrayD<f64>) -> Result<Self> {
        if values.shape() != grid.shape() {
            return Err(Error::ShapeMismatch {
                expected: grid.shape().to_vec(),
                found: values.shape().to_vec(),
            });
        }
        let values = values.as_standard_layout().into_owned();
        if let Some((flat, &v)) = values
            .as_slice()
            .expect("standard layout")
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite())
        {
            return Err(Error::NonFinite {
                point: grid.point(flat),
                value: v,
            });
        }
        Ok(Self { grid, values })
    }

    pub fn from_vec(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        let shape = grid.shape().to_vec();
        let values =
            ArrayD::from_shape_vec(IxDyn(&shape), values).map_err(|_| Error::ShapeMismatch {
                expected: shape.clone(),
                found: vec![],
            })?;
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let values = ArrayD::zeros(IxDyn(grid.shape()));
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn values(&self) -> &ArrayD<f64> {
        &self.values
    }

    /// Values in row-major order (last axis fastest).
    pub fn as_slice(&self) -> &[f64] {
        self.values.as_slice().expect("standard layout")
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.mapv(|v| c * v),
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.mapv(f64::abs),
        }
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: &self.values + &other.values,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.as_slice().iter().all(|&v| v == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.as_slice().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Integral of `|f|` under the midpoint rule.
    pub fn l1_norm(&self) -> f64 {
        self.as_slice()
            .iter()
            .enumerate()
            .map(|(i, v)| v.abs() * self.grid.cell_volume(i))
            .sum()
    }

    /// Value of the cell containing `x`, zero outside the grid.
    pub fn value_at(&self, x: &[f64]) -> f64 {
        self.grid
            .locate(x)
            .map(|i| self.as_slice()[i])
            .unwrap_or(0.0)
    }
}

/// Samples `expr` at every grid point.
pub fn sample<F>(grid: &Arc<Grid>, expr: F) -> Result<GridFunction>
where
    F: Fn(&[f64]) -> f64,
{
    let mut p = vec![0.0; grid.dim()];
    let mut values = Vec::with_capacity(grid.len());
    for flat in 0..grid.len() {
        grid.point_into(flat, &mut p);
        let v = expr(&p);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                point: p.clone(),
                value: v,
            });
        }
        values.push(v);
    }
    GridFunction::from_vec(grid.clone(), values)
}

/// `f` on the masked samples, zero elsewhere.
pub fn restrict(f: &GridFunction, mask: &Mask) -> Result<GridFunction> {
    if mask.shape() != f.values.shape() {
        return Err(Error::ShapeMismatch {
            expected: f.values.shape().to_vec(),
            found: mask.shape().to_vec(),
        });
    }
    let mut values = f.values.clone();
    ndarray::Zip::from(&mut values).and(mask).for_each(|v, &m| {
        if !m {
            *v = 0.0;
        }
    });
    Ok(GridFunction {
        grid: f.grid.clone(),
        values,
    })
}

/// Mask of the samples whose Euclidean norm is at most `r`.
pub fn ball_mask(grid: &Grid, r: f64) -> Mask {
    let mut p = vec![0.0; grid.dim()];
    let data = (0..grid.len())
        .map(|flat| {
            grid.point_into(flat, &mut p);
            euclidean_norm(&p) <= r
        })
        .collect();
    Mask::from_shape_vec(IxDyn(grid.shape()), data).expect("grid shape")
}

pub fn euclidean_norm(x: &[f64]) -> f64 {
    if x.len() == 1 {
        x[0].abs()
    } else {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Annulus index `k` with `2^(k-1) <= r < 2^k`, restricted to `[k_min, k_max]`.
pub fn annulus_index(r: f64, k_min: i32, k_max: i32) -> Option<i32> {
    if !(r >= pow2(k_min - 1)) || !(r < pow2(k_max)) {
        return None;
    }
    let mut k = (r.log2().floor() as i32 + 1).clamp(k_min, k_max);
    while k > k_min && r < pow2(k - 1) {
        k -= 1;
    }
    while k < k_max && r >= pow2(k) {
        k += 1;
    }
    Some(k)
}

pub(crate) fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

/// Assignment of every sample to at most one annulus `A_k`.
#[derive(Debug, Clone)]
pub struct DyadicDecomposition {
    k_min: i32,
    k_max: i32,
    labels: Vec<Option<i32>>,
    shape: Vec<usize>,
}

impl DyadicDecomposition {
    pub fn new(grid: &Grid, k_min: i32, k_max: i32) -> Result<Self> {
        if k_min > k_max {
            return Err(Error::InvalidRange { k_min, k_max });
        }
        let mut p = vec![0.0; grid.dim()];
        let labels = (0..grid.len())
            .map(|flat| {
                grid.point_into(flat, &mut p);
                annulus_index(euclidean_norm(&p), k_min, k_max)
            })
            .collect();
        Ok(Self {
            k_min,
            k_max,
            labels,
            shape: grid.shape().to_vec(),
        })
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }

    pub fn k_max(&self) -> i32 {
        self.k_max
    }

    pub fn ks(&self) -> impl Iterator<Item = i32> {
        self.k_min..=self.k_max
    }

    pub fn num_annuli(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn labels(&self) -> &[Option<i32>] {
        &self.labels
    }

    pub fn label(&self, flat: usize) -> Option<i32> {
        self.labels[flat]
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Indicator of `A_k` over the samples.
    pub fn mask(&self, k: i32) -> Mask {
        let data = self.labels.iter().map(|&l| l == Some(k)).collect();
        Mask::from_shape_vec(IxDyn(&self.shape), data).expect("decomposition shape")
    }

    /// Union of all annulus masks.
    pub fn coverage_mask(&self) -> Mask {
        let data = self.labels.iter().map(Option::is_some).collect();
        Mask::from_shape_vec(IxDyn(&self.shape), data).expect("decomposition shape")
    }

    pub fn count(&self, k: i32) -> usize {
        self.labels.iter().filter(|&&l| l == Some(k)).count()
    }

    /// Lowest and highest annulus on which `f` is non-zero.
    pub fn support_range(&self, f: &GridFunction) -> Option<(i32, i32)> {
        let mut range: Option<(i32, i32)> = None;
        for (l, &v) in self.labels.iter().zip(f.as_slice()) {
            if v != 0.0 {
                if let Some(k) = l {
                    range = Some(match range {
                        None => (*k, *k),
                        Some((lo, hi)) => (lo.min(*k), hi.max(*k)),
                    });
                }
            }
        }
        range
    }

    /// Errors when `f` is non-zero on a sample outside every annulus.
    pub fn check_support(&self, f: &GridFunction) -> Result<()> {
        if f.values.shape() != self.shape.as_slice() {
            return Err(Error::ShapeMismatch {
                expected: self.shape.clone(),
                found: f.values.shape().to_vec(),
            });
        }
        let count = self
            .labels
            .iter()
            .zip(f.as_slice())
            .filter(|(l, &v)| l.is_none() && v != 0.0)
            .count();
        if count > 0 {
            return Err(Error::SupportOutsideDecomposition { count });
        }
        Ok(())
    }
}

/// Parameters of a dyadic grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GridParams {
    pub n: usize,
    pub k_min: i32,
    pub k_max: i32,
    pub samples_per_octave: usize,
}

impl GridParams {
    pub fn new(n: usize, k_min: i32, k_max: i32, samples_per_octave: usize) -> Self {
        Self {
            n,
            k_min,
            k_max,
            samples_per_octave,
        }
    }

    pub fn with_spo(self, samples_per_octave: usize) -> Self {
        Self {
            samples_per_octave,
            ..self
        }
    }

    pub fn build(&self) -> Result<DyadicGrid> {
        make_dyadic_grid(self.n, self.k_min, self.k_max, self.samples_per_octave)
    }
}

/// A dyadic grid together with its annulus decomposition.
#[derive(Debug, Clone)]
pub struct DyadicGrid {
    pub grid: Arc<Grid>,
    pub decomposition: DyadicDecomposition,
    pub params: GridParams,
}

impl DyadicGrid {
    pub fn sample<F: Fn(&[f64]) -> f64>(&self, expr: F) -> Result<GridFunction> {
        sample(&self.grid, expr)
    }

    pub fn zeros(&self) -> GridFunction {
        GridFunction::zeros(self.grid.clone())
    }

    /// Indicator of `A_k`.
    pub fn annulus_indicator(&self, k: i32) -> GridFunction {
        let data = self
            .decomposition
            .labels()
            .iter()
            .map(|&l| if l == Some(k) { 1.0 } else { 0.0 })
            .collect();
        GridFunction::from_vec(self.grid.clone(), data).expect("grid shape")
    }
}

/// Edges of one symmetric dyadic axis covering `[-2^k_max, 2^k_max]`.
fn dyadic_axis_edges(k_min: i32, k_max: i32, spo: usize) -> Vec<f64> {
    let s = spo as f64;
    let mut positive = Vec::with_capacity(spo * (k_max - k_min + 2) as usize + 1);
    let inner = pow2(k_min - 1);
    for i in 0..=spo {
        positive.push(inner * (i as f64) / s);
    }
    for k in k_min..=k_max {
        let start = pow2(k - 1);
        for i in 1..=spo {
            positive.push(start * (1.0 + i as f64 / s));
        }
    }
    let mut edges: Vec<f64> = positive.iter().skip(1).rev().map(|e| -e).collect();
    edges.extend(positive);
    edges
}

/// Builds the symmetric dyadic grid on `[-2^k_max, 2^k_max]^n` with
/// `samples_per_octave` uniform cells in each octave `[2^(k-1), 2^k)` of
/// every axis, plus the same number of cells on the inner interval
/// `[0, 2^(k_min-1))`.
pub fn make_dyadic_grid(
    n: usize,
    k_min: i32,
    k_max: i32,
    samples_per_octave: usize,
) -> Result<DyadicGrid> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if k_min > k_max {
        return Err(Error::InvalidRange { k_min, k_max });
    }
    if samples_per_octave < 2 {
        return Err(Error::SamplesPerOctave(samples_per_octave));
    }
    let finest = pow2(k_min - 1) / samples_per_octave as f64;
    let octaves = (k_max - k_min + 1) as f64 + (samples_per_octave as f64).log2();
    if !finest.is_normal() || !pow2(k_max).is_finite() || octaves > 48.0 {
        return Err(Error::Resolution {
            k_min,
            k_max,
            spo: samples_per_octave,
        });
    }
    let per_axis = 2 * samples_per_octave * (k_max - k_min + 2) as usize;
    let total = per_axis
        .checked_pow(n as u32)
        .filter(|&t| t <= MAX_GRID_SAMPLES)
        .ok_or(Error::GridTooLarge(per_axis.saturating_pow(n as u32)))?;
    let axis = AxisGrid::from_edges(dyadic_axis_edges(k_min, k_max, samples_per_octave))?;
    debug_assert_eq!(axis.len(), per_axis);
    let grid = Arc::new(Grid::new(vec![axis; n])?);
    debug_assert_eq!(grid.len(), total);
    let decomposition = DyadicDecomposition::new(&grid, k_min, k_max)?;
    Ok(DyadicGrid {
        grid,
        decomposition,
        params: GridParams::new(n, k_min, k_max, samples_per_octave),
    })
}

// ---------------------------------------------------------------------------
// CSV serialization
//
// Header `x1,..,xn,w1,..,wn,value`, one row per sample in row-major order
// (last axis fastest). Floats use the shortest representation that parses
// back to the same f64, so a write/read round trip is lossless.
// ---------------------------------------------------------------------------

pub fn write_csv<W: Write>(f: &GridFunction, out: W) -> Result<()> {
    let n = f.dim();
    let mut wtr = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.extend((1..=n).map(|i| format!("w{i}")));
    header.push("value".into());
    wtr.write_record(&header)?;
    let grid = f.grid();
    let mut idx = vec![0; n];
    for (flat, v) in f.as_slice().iter().enumerate() {
        grid.multi_index(flat, &mut idx);
        let mut row: Vec<String> = idx
            .iter()
            .enumerate()
            .map(|(d, &i)| grid.axis(d).points()[i].to_string())
            .collect();
        row.extend(
            idx.iter()
                .enumerate()
                .map(|(d, &i)| grid.axis(d).widths()[i].to_string()),
        );
        row.push(v.to_string());
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<GridFunction> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || (header.len() - 1) % 2 != 0 {
        return Err(Error::Parse(format!("unexpected header {header:?}")));
    }
    let n = (header.len() - 1) / 2;
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != 2 * n + 1 {
            return Err(Error::Parse("ragged row".into()));
        }
        rows.push(row);
    }
    let mut axes = Vec::with_capacity(n);
    for d in 0..n {
        let mut pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r[d], r[n + d])).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        pairs.dedup_by(|a, b| a.0 == b.0);
        let (points, widths) = pairs.into_iter().unzip();
        axes.push(AxisGrid::new(points, widths)?);
    }
    let grid = Arc::new(Grid::new(axes)?);
    if grid.len() != rows.len() {
        return Err(Error::Parse(format!(
            "{} rows for a grid of {} samples",
            rows.len(),
            grid.len()
        )));
    }
    let mut values = Vec::with_capacity(rows.len());
    let mut p = vec![0.0; n];
    for (flat, row) in rows.iter().enumerate() {
        grid.point_into(flat, &mut p);
        if p.as_slice() != &row[..n] {
            return Err(Error::Parse(format!(
                "row {flat} is out of row-major order"
            )));
        }
        values.push(row[2 * n]);
    }
    GridFunction::from_vec(grid, values)
}
