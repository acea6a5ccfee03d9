//! Mixed Lebesgue, mixed Morrey, mixed Herz and homogeneous mixed
//! Herz-Morrey norms of grid functions.
//!
//! The mixed norm integrates axis by axis with `x1` innermost:
//!
//! ```text
//! ||f||_q = ( ∫ ... ( ∫ |f|^q1 dx1 )^(q2/q1) ... dxn )^(1/qn)
//! ```
//!
//! The Herz-type norms are built from the annulus terms
//! `t_k = 2^(k·alpha) ||f·χ_k||_q`, `k ∈ [k_min, k_max]`.

use std::ops::RangeInclusive;

use ndarray::{ArrayD, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{ball_mask, restrict, DyadicDecomposition, GridFunction};

/// Tuple of per-axis integrability exponents `q = (q1, .., qn)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ExponentVector(Vec<f64>);

impl ExponentVector {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::InvalidExponent("empty exponent vector".into()));
        }
        if let Some(bad) = q.iter().find(|&&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidExponent(format!(
                "every q_i must lie in (0, inf), got {bad}"
            )));
        }
        Ok(Self(q))
    }

    /// `(q, .., q)` with `n` entries.
    pub fn constant(q: f64, n: usize) -> Result<Self> {
        Self::new(vec![q; n])
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

    /// `Σ 1/q_i`.
    pub fn reciprocal_sum(&self) -> f64 {
        self.0.iter().map(|q| 1.0 / q).sum()
    }

    /// Conjugate exponents `q_i' = q_i / (q_i - 1)`; needs every `q_i > 1`.
    pub fn conjugate(&self) -> Result<Self> {
        if self.0.iter().any(|&q| q <= 1.0) {
            return Err(Error::InvalidExponent(
                "conjugate exponent needs q_i > 1".into(),
            ));
        }
        Ok(Self(self.0.iter().map(|q| q / (q - 1.0)).collect()))
    }

    pub fn all_at_least(&self, bound: f64) -> bool {
        self.0.iter().all(|&q| q >= bound)
    }
}

impl TryFrom<Vec<f64>> for ExponentVector {
    type Error = Error;

    fn try_from(q: Vec<f64>) -> Result<Self> {
        Self::new(q)
    }
}

impl From<ExponentVector> for Vec<f64> {
    fn from(q: ExponentVector) -> Self {
        q.0
    }
}

/// `(alpha, p, lambda, q)` together with the range over which the outer
/// supremum in `k0` is taken.
#[derive(Debug, Clone, PartialEq)]
pub struct HerzMorreyParams {
    pub alpha: f64,
    pub p: f64,
    pub lambda: f64,
    pub q: ExponentVector,
    pub k0_range: RangeInclusive<i32>,
}

impl HerzMorreyParams {
    pub fn new(
        alpha: f64,
        p: f64,
        lambda: f64,
        q: ExponentVector,
        k0_range: RangeInclusive<i32>,
    ) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidExponent(format!("alpha = {alpha}")));
        }
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::InvalidExponent(format!(
                "p must lie in (0, inf), got {p}"
            )));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidExponent(format!(
                "lambda must lie in [0, inf), got {lambda}"
            )));
        }
        if k0_range.is_empty() {
            return Err(Error::EmptyK0Range);
        }
        Ok(Self {
            alpha,
            p,
            lambda,
            q,
            k0_range,
        })
    }

    /// Parameters whose supremum runs over the whole decomposition range.
    pub fn over(
        alpha: f64,
        p: f64,
        lambda: f64,
        q: ExponentVector,
        decomp: &DyadicDecomposition,
    ) -> Result<Self> {
        Self::new(alpha, p, lambda, q, decomp.k_min()..=decomp.k_max())
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self {
            alpha,
            ..self.clone()
        }
    }

    pub fn with_p(&self, p: f64) -> Self {
        Self { p, ..self.clone() }
    }

    pub fn with_q(&self, q: ExponentVector) -> Self {
        Self { q, ..self.clone() }
    }
}

fn check_dim(f: &GridFunction, q: &ExponentVector) -> Result<()> {
    if q.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: q.len(),
        });
    }
    Ok(())
}

#[inline]
fn pow(v: f64, e: f64) -> f64 {
    if e == 1.0 {
        v
    } else {
        v.powf(e)
    }
}

/// Iterated quadrature over the axes, `x1` first. `axis_weights[d]` is the
/// exponent `a` of an extra factor `|x_d|^a` applied before integrating
/// axis `d`.
fn iterated_norm(f: &GridFunction, q: &[f64], axis_weights: Option<&[f64]>) -> f64 {
    let grid = f.grid();
    let mut cur: ArrayD<f64> = f.values().mapv(f64::abs);
    for (d, &qd) in q.iter().enumerate() {
        let axis = grid.axis(d);
        let widths = axis.widths();
        let xs = axis.points();
        let weight = axis_weights.map(|a| a[d]);
        cur = cur.map_axis(Axis(0), |lane| {
            let mut s = 0.0;
            for (j, &v) in lane.iter().enumerate() {
                if v != 0.0 {
                    let mut term = widths[j] * pow(v, qd);
                    if let Some(a) = weight {
                        term *= xs[j].abs().powf(a);
                    }
                    s += term;
                }
            }
            pow(s, 1.0 / qd)
        });
    }
    cur.iter().next().copied().unwrap_or(0.0)
}

/// Mixed Lebesgue norm `||f||_q` (x1 innermost).
pub fn mixed_lebesgue_norm(f: &GridFunction, q: &ExponentVector) -> Result<f64> {
    check_dim(f, q)?;
    Ok(iterated_norm(f, q.as_slice(), None))
}

/// Mixed norm with power weights: before integrating axis `i` the integrand
/// is multiplied by `|x_i|^(alpha_i q_i)`.
pub fn weighted_mixed_norm(f: &GridFunction, q: &ExponentVector, alphas: &[f64]) -> Result<f64> {
    check_dim(f, q)?;
    if alphas.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            found: alphas.len(),
        });
    }
    let exps: Vec<f64> = alphas
        .iter()
        .zip(q.as_slice())
        .map(|(a, q)| a * q)
        .collect();
    Ok(iterated_norm(f, q.as_slice(), Some(&exps)))
}

/// Plain `L^q` norm over the full cell volumes, no axis iteration.
pub fn scalar_lebesgue_norm(f: &GridFunction, q: f64) -> Result<f64> {
    if !(q > 0.0 && q.is_finite()) {
        return Err(Error::InvalidExponent(format!("q = {q}")));
    }
    let grid = f.grid();
    let s: f64 = f
        .as_slice()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(i, v)| pow(v.abs(), q) * grid.cell_volume(i))
        .sum();
    Ok(pow(s, 1.0 / q))
}

/// `||f·χ_k||_q` for every `k` of the decomposition, in increasing `k`.
pub fn annulus_norms(
    f: &GridFunction,
    q: &ExponentVector,
    decomp: &DyadicDecomposition,
) -> Result<Vec<f64>> {
    check_dim(f, q)?;
    decomp.check_support(f)?;
    decomp
        .ks()
        .map(|k| {
            Ok(iterated_norm(
                &restrict(f, &decomp.mask(k))?,
                q.as_slice(),
                None,
            ))
        })
        .collect()
}

/// `ℓ^p` norm of non-negative terms, scaled by the largest term so that a
/// single non-zero term is returned exactly.
pub fn lp_norm(terms: &[f64], p: f64) -> f64 {
    let m = terms.iter().fold(0.0f64, |a, &b| a.max(b));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = terms.iter().map(|&t| pow(t / m, p)).sum();
    m * pow(s, 1.0 / p)
}

/// Annulus terms `2^(k·alpha) ||f·χ_k||_q`.
pub fn herz_terms(annulus_norms: &[f64], alpha: f64, k_min: i32) -> Vec<f64> {
    annulus_norms
        .iter()
        .enumerate()
        .map(|(i, &nk)| ((k_min + i as i32) as f64 * alpha).exp2() * nk)
        .collect()
}

/// Herz-Morrey norm from precomputed annulus norms.
pub fn herz_morrey_from_annuli(
    annulus_norms: &[f64],
    params: &HerzMorreyParams,
    decomp: &DyadicDecomposition,
) -> Result<f64> {
    let (lo, hi) = (*params.k0_range.start(), *params.k0_range.end());
    if lo > hi {
        return Err(Error::EmptyK0Range);
    }
    if lo < decomp.k_min() || hi > decomp.k_max() {
        return Err(Error::K0OutOfRange {
            lo,
            hi,
            k_min: decomp.k_min(),
            k_max: decomp.k_max(),
        });
    }
    let terms = herz_terms(annulus_norms, params.alpha, decomp.k_min());
    let mut best = 0.0f64;
    for k0 in lo..=hi {
        let partial = lp_norm(&terms[..=(k0 - decomp.k_min()) as usize], params.p);
        let damped = (-(k0 as f64) * params.lambda).exp2() * partial;
        best = best.max(damped);
    }
    Ok(best)
}

/// Homogeneous mixed Herz-Morrey norm
/// `max_{k0} 2^(-k0·lambda) (Σ_{k <= k0} 2^(k·alpha·p) ||f·χ_k||_q^p)^(1/p)`.
///
/// `f` must vanish outside the decomposition; mass outside it is reported
/// as an error rather than dropped.
pub fn herz_morrey_norm(
    f: &GridFunction,
    params: &HerzMorreyParams,
    decomp: &DyadicDecomposition,
) -> Result<f64> {
    let norms = annulus_norms(f, &params.q, decomp)?;
    herz_morrey_from_annuli(&norms, params, decomp)
}

/// Homogeneous mixed Herz norm `(Σ_k 2^(k·alpha·p) ||f·χ_k||_q^p)^(1/p)`.
pub fn herz_norm(
    f: &GridFunction,
    alpha: f64,
    p: f64,
    q: &ExponentVector,
    decomp: &DyadicDecomposition,
) -> Result<f64> {
    // reuse the parameter validation
    let params = HerzMorreyParams::new(alpha, p, 0.0, q.clone(), decomp.k_max()..=decomp.k_max())?;
    let norms = annulus_norms(f, &params.q, decomp)?;
    Ok(lp_norm(&herz_terms(&norms, alpha, decomp.k_min()), p))
}

/// Dyadic radii `{2^k : k_min <= k <= k_max}`.
pub fn dyadic_radii(decomp: &DyadicDecomposition) -> Vec<f64> {
    decomp.ks().map(|k| (k as f64).exp2()).collect()
}

/// Mixed Morrey norm `max_r r^(-lambda) ||f·χ_{B(0,r)}||_q` over a finite
/// set of radii.
pub fn mixed_morrey_norm(
    f: &GridFunction,
    lambda: f64,
    q: &ExponentVector,
    radii: &[f64],
) -> Result<f64> {
    check_dim(f, q)?;
    if radii.is_empty() {
        return Err(Error::EmptyRadiusSet);
    }
    if let Some(&r) = radii.iter().find(|&&r| !(r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidRadius(r));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidExponent(format!("lambda = {lambda}")));
    }
    let mut best = 0.0f64;
    for &r in radii {
        let local = restrict(f, &ball_mask(f.grid(), r))?;
        best = best.max(r.powf(-lambda) * iterated_norm(&local, q.as_slice(), None));
    }
    Ok(best)
}

/// `max(1, 2^(Σ (1 - q_i)/q_i))`.
pub fn quasi_triangle_constant(q: &ExponentVector) -> f64 {
    let e: f64 = q.as_slice().iter().map(|q| (1.0 - q) / q).sum();
    e.exp2().max(1.0)
}

/// `||f + g|| / (||f|| + ||g||)` in the Herz-Morrey norm, 0 when both vanish.
pub fn quasi_triangle_defect(
    f: &GridFunction,
    g: &GridFunction,
    params: &HerzMorreyParams,
    decomp: &DyadicDecomposition,
) -> Result<f64> {
    let sum = f.add(g)?;
    let nf = herz_morrey_norm(f, params, decomp)?;
    let ng = herz_morrey_norm(g, params, decomp)?;
    let nsum = herz_morrey_norm(&sum, params, decomp)?;
    if nf + ng == 0.0 {
        return Ok(0.0);
    }
    Ok(nsum / (nf + ng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_dyadic_grid;
    use approx::assert_relative_eq;

    fn q(v: &[f64]) -> ExponentVector {
        ExponentVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn unit_square_indicator() {
        let g = make_dyadic_grid(2, -1, 1, 4).unwrap();
        let f = g
            .sample(|x| {
                if (0.0..1.0).contains(&x[0]) && (0.0..1.0).contains(&x[1]) {
                    1.0
                } else {
                    0.0
                }
            })
            .unwrap();
        assert_eq!(mixed_lebesgue_norm(&f, &q(&[3.0, 4.0])).unwrap(), 1.0);
        assert_eq!(
            mixed_lebesgue_norm(&f.scaled(2.0), &q(&[3.0, 4.0])).unwrap(),
            2.0
        );
    }

    #[test]
    fn rectangle_iterated_integral() {
        let g = make_dyadic_grid(2, -1, 1, 4).unwrap();
        let f = g
            .sample(|x| {
                if (0.0..1.0).contains(&x[0]) && (0.0..2.0).contains(&x[1]) {
                    1.0
                } else {
                    0.0
                }
            })
            .unwrap();
        assert_relative_eq!(
            mixed_lebesgue_norm(&f, &q(&[1.0, 2.0])).unwrap(),
            2f64.sqrt(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn annulus_zero_l2() {
        let g = make_dyadic_grid(1, -2, 2, 8).unwrap();
        let f = g.annulus_indicator(0);
        assert_eq!(mixed_lebesgue_norm(&f, &q(&[2.0])).unwrap(), 1.0);
    }

    #[test]
    fn dimension_and_exponent_errors() {
        let g = make_dyadic_grid(2, 0, 1, 2).unwrap();
        let f = g.zeros();
        assert!(matches!(
            mixed_lebesgue_norm(&f, &q(&[2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(ExponentVector::new(vec![2.0, 0.0]).is_err());
        assert!(ExponentVector::new(vec![-1.0]).is_err());
        assert!(ExponentVector::new(vec![f64::INFINITY]).is_err());
        assert_eq!(mixed_lebesgue_norm(&f, &q(&[2.0, 3.0])).unwrap(), 0.0);
    }

    #[test]
    fn single_annulus_herz_morrey() {
        let g = make_dyadic_grid(1, -3, 3, 8).unwrap();
        let d = &g.decomposition;
        for j in -3..=3 {
            let f = g.annulus_indicator(j);
            for &(alpha, p, lambda, qq) in &[(0.3, 1.0, 0.2, 2.0), (-0.5, 3.0, 0.0, 1.0)] {
                let params = HerzMorreyParams::over(alpha, p, lambda, q(&[qq]), d).unwrap();
                let expected = (j as f64 * (alpha + 1.0 / qq - lambda)).exp2();
                // brute force over k0
                let nk = mixed_lebesgue_norm(&f, &q(&[qq])).unwrap() * (j as f64 * alpha).exp2();
                let brute = (-3..=3)
                    .map(|k0| {
                        if k0 >= j {
                            (-(k0 as f64) * lambda).exp2() * nk
                        } else {
                            0.0
                        }
                    })
                    .fold(0.0, f64::max);
                let got = herz_morrey_norm(&f, &params, d).unwrap();
                assert_relative_eq!(got, expected, max_relative = 1e-12);
                assert_relative_eq!(got, brute, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn herz_morrey_zero_and_two_annuli() {
        let g = make_dyadic_grid(1, -2, 2, 4).unwrap();
        let d = &g.decomposition;
        let params = HerzMorreyParams::over(0.0, 1.0, 0.0, q(&[1.0]), d).unwrap();
        assert_eq!(herz_morrey_norm(&g.zeros(), &params, d).unwrap(), 0.0);
        let f = g.annulus_indicator(0).add(&g.annulus_indicator(1)).unwrap();
        assert_eq!(herz_morrey_norm(&f, &params, d).unwrap(), 3.0);
    }

    #[test]
    fn support_outside_is_signalled() {
        let g = make_dyadic_grid(1, 0, 1, 4).unwrap();
        let d = &g.decomposition;
        let f = g.sample(|_| 1.0).unwrap();
        let params = HerzMorreyParams::over(0.0, 1.0, 0.0, q(&[1.0]), d).unwrap();
        assert!(matches!(
            herz_morrey_norm(&f, &params, d),
            Err(Error::SupportOutsideDecomposition { .. })
        ));
        let bad = HerzMorreyParams::new(0.0, 1.0, 0.0, q(&[1.0]), -5..=1).unwrap();
        assert!(matches!(
            herz_morrey_norm(&g.annulus_indicator(0), &bad, d),
            Err(Error::K0OutOfRange { .. })
        ));
        #[allow(clippy::reversed_empty_ranges)]
        let empty = HerzMorreyParams::new(0.0, 1.0, 0.0, q(&[1.0]), 1..=0);
        assert!(matches!(empty, Err(Error::EmptyK0Range)));
    }

    #[test]
    fn herz_norm_examples() {
        let g = make_dyadic_grid(1, -3, 3, 8).unwrap();
        let d = &g.decomposition;
        for j in -3..=3 {
            let f = g.annulus_indicator(j);
            let got = herz_norm(&f, 0.4, 2.0, &q(&[3.0]), d).unwrap();
            assert_relative_eq!(
                got,
                (j as f64 * (0.4 + 1.0 / 3.0)).exp2(),
                max_relative = 1e-12
            );
            let hm = HerzMorreyParams::new(0.4, 2.0, 0.0, q(&[3.0]), 3..=3).unwrap();
            assert_eq!(herz_morrey_norm(&f, &hm, d).unwrap(), got);
        }
        assert_eq!(herz_norm(&g.zeros(), 0.4, 2.0, &q(&[3.0]), d).unwrap(), 0.0);
    }

    #[test]
    fn morrey_examples() {
        let g = make_dyadic_grid(1, -2, 3, 8).unwrap();
        let ball = g
            .sample(|x| if x[0].abs() <= 1.0 { 1.0 } else { 0.0 })
            .unwrap();
        let got = mixed_morrey_norm(&ball, 0.5, &q(&[1.0]), &[1.0, 2.0, 4.0]).unwrap();
        assert_eq!(got, 2.0);
        let f = g.sample(|x| (x[0] * 0.7).cos().abs()).unwrap();
        let radii = dyadic_radii(&g.decomposition);
        let largest = restrict(&f, &ball_mask(&g.grid, 8.0)).unwrap();
        assert_eq!(
            mixed_morrey_norm(&f, 0.0, &q(&[2.0]), &radii).unwrap(),
            mixed_lebesgue_norm(&largest, &q(&[2.0])).unwrap()
        );
        assert_eq!(
            mixed_morrey_norm(&g.zeros(), 0.3, &q(&[2.0]), &radii).unwrap(),
            0.0
        );
        assert!(matches!(
            mixed_morrey_norm(&f, 0.3, &q(&[2.0]), &[]),
            Err(Error::EmptyRadiusSet)
        ));
    }

    #[test]
    fn weighted_examples() {
        let g = make_dyadic_grid(1, -1, 2, 8).unwrap();
        let f = g
            .sample(|x| if (1.0..2.0).contains(&x[0]) { 1.0 } else { 0.0 })
            .unwrap();
        assert_relative_eq!(
            weighted_mixed_norm(&f, &q(&[1.0]), &[1.0]).unwrap(),
            1.5,
            max_relative = 1e-15
        );
        let h = g.sample(|x| (x[0] * 1.3).sin()).unwrap();
        assert_eq!(
            weighted_mixed_norm(&h, &q(&[2.5]), &[0.0]).unwrap(),
            mixed_lebesgue_norm(&h, &q(&[2.5])).unwrap()
        );
        assert_eq!(
            weighted_mixed_norm(&g.zeros(), &q(&[2.0]), &[0.7]).unwrap(),
            0.0
        );
        assert!(weighted_mixed_norm(&h, &q(&[2.0]), &[0.7, 1.0]).is_err());
    }

    #[test]
    fn defect_examples() {
        let g = make_dyadic_grid(1, -2, 2, 8).unwrap();
        let d = &g.decomposition;
        let params = HerzMorreyParams::over(0.2, 1.5, 0.1, q(&[2.0]), d).unwrap();
        let f = restrict(&g.sample(|x| x[0].sin() + 2.0).unwrap(), &d.coverage_mask()).unwrap();
        assert_eq!(
            quasi_triangle_defect(&f, &g.zeros(), &params, d).unwrap(),
            1.0
        );
        assert_relative_eq!(
            quasi_triangle_defect(&f, &f, &params, d).unwrap(),
            1.0,
            max_relative = 1e-15
        );
        assert_eq!(
            quasi_triangle_defect(&g.zeros(), &g.zeros(), &params, d).unwrap(),
            0.0
        );
        assert_eq!(quasi_triangle_constant(&q(&[1.0, 3.0])), 1.0);
        assert_relative_eq!(quasi_triangle_constant(&q(&[0.5])), 2.0);
    }

    #[test]
    fn lp_norm_single_term_is_exact() {
        for p in [0.3, 1.0, 2.0, 7.5] {
            assert_eq!(lp_norm(&[0.0, 0.123456789, 0.0], p), 0.123456789);
        }
        assert_eq!(lp_norm(&[0.0, 0.0], 2.0), 0.0);
        assert_relative_eq!(lp_norm(&[3.0, 4.0], 2.0), 5.0, max_relative = 1e-15);
    }
}
