//! Radial outer norms: local mixed Morrey-type norms, their dyadic
//! discretization, mixed Herz norms and weight admissibility.
//!
//! All `(0, inf)` integrals are truncated to a [`RadialGrid`]. Radii beyond
//! the spatial grid are allowed: sampled functions vanish outside the grid,
//! so the inner norm saturates at its full-grid value there.

mod radial_grid;
mod weight;

pub use radial_grid::{RadialGrid, RadialGridSpec};
pub(crate) use radial_grid::log_trapezoid_norm;
pub use weight::{
    derive_hat_weights, omega_check, AdmissibilityReport, AdmissibilityVerdict, RadialWeight, TailEstimate,
};

use crate::error::{Error, Result};
use crate::mixed_lebesgue::{iterated_norm, MixedExponent, Region, RegionWeights, Shape};
use crate::operators::heat_sup;
use crate::sampled::SampledFunction;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Relative change above which truncation is flagged.
pub const TRUNCATION_FLAG_THRESHOLD: f64 = 1e-3;

/// Parameters of the Morrey-type norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorreyParams {
    pub p: MixedExponent,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub theta: f64,
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub weight: Option<RadialWeight>,
    #[serde(default)]
    pub shape: Shape,
}

impl MorreyParams {
    /// Parameters for the Morrey norm with index `lambda` (cube regions).
    pub fn lambda(p: MixedExponent, theta: f64, lambda: f64) -> Self {
        MorreyParams { p, theta, lambda: Some(lambda), weight: None, shape: Shape::Cube }
    }

    /// Parameters for the weighted norm (cube regions).
    pub fn weighted(p: MixedExponent, theta: f64, weight: RadialWeight) -> Self {
        MorreyParams { p, theta, lambda: None, weight: Some(weight), shape: Shape::Cube }
    }

    pub fn with_shape(mut self, shape: Shape) -> Self {
        self.shape = shape;
        self
    }

    fn check_theta(&self) -> Result<()> {
        if !(self.theta > 0.0) {
            return Err(Error::param(format!("outer exponent must be positive, got {}", self.theta)));
        }
        Ok(())
    }

    fn require_lambda(&self) -> Result<f64> {
        let l = self.lambda.ok_or_else(|| Error::param("lambda is required for this norm"))?;
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::param(format!("lambda must be finite and nonnegative, got {l}")));
        }
        Ok(l)
    }

    fn require_weight(&self) -> Result<&RadialWeight> {
        let w = self.weight.as_ref().ok_or_else(|| Error::param("a weight is required for this norm"))?;
        w.validate()?;
        Ok(w)
    }
}

/// A truncated radial norm together with its truncation sensitivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormValue {
    pub value: f64,
    /// Relative change when the outermost octave is dropped.
    pub outer_sensitivity: f64,
    /// Relative change when the innermost octave is dropped.
    pub inner_sensitivity: f64,
    pub truncation_flag: bool,
}

/// `r -> ||f||_{L_p(region(r))}` on every node of `rgrid`.
pub fn radial_profile(f: &SampledFunction, p: &MixedExponent, shape: Shape, rgrid: &RadialGrid) -> Result<Vec<f64>> {
    let grid = *f.grid();
    if p.len() != grid.dim() {
        return Err(Error::param("exponent length does not match the grid dimension"));
    }
    let saturation = match shape {
        Shape::Cube => grid.half_width(),
        Shape::Ball => grid.corner_radius() + grid.spacing(),
    };
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let full = iterated_norm(&grid, &abs, p.entries(), &RegionWeights::full(&grid));
    let out = rgrid
        .nodes()
        .par_iter()
        .map(|&r| {
            if r >= saturation {
                full
            } else {
                let w = RegionWeights::region(&grid, Region { shape, radius: r });
                iterated_norm(&grid, &abs, p.entries(), &w)
            }
        })
        .collect();
    Ok(out)
}

fn with_sensitivity(values: &[f64], measure: &[f64], rgrid: &RadialGrid, theta: f64) -> NormValue {
    let n = values.len() - 1;
    let ppo = rgrid.points_per_octave();
    let du = rgrid.du();
    let value = log_trapezoid_norm(values, measure, du, theta, 0, n);
    let rel = |v: f64| if value > 0.0 { (value - v).abs() / value } else { 0.0 };
    let outer = rel(log_trapezoid_norm(values, measure, du, theta, 0, n - ppo));
    let inner = rel(log_trapezoid_norm(values, measure, du, theta, ppo, n));
    NormValue {
        value,
        outer_sensitivity: outer,
        inner_sensitivity: inner,
        truncation_flag: outer > TRUNCATION_FLAG_THRESHOLD || inner > TRUNCATION_FLAG_THRESHOLD,
    }
}

/// `|| w(r) ||f||_{L_p(Q(0,r))} ||_{L_theta(dr)}` truncated to `rgrid`.
pub fn lm_norm(f: &SampledFunction, params: &MorreyParams, rgrid: &RadialGrid) -> Result<NormValue> {
    params.check_theta()?;
    let w = params.require_weight()?.eval_many(rgrid.nodes())?;
    let g = radial_profile(f, &params.p, params.shape, rgrid)?;
    let vals: Vec<f64> = g.iter().zip(&w).map(|(a, b)| a * b).collect();
    Ok(with_sensitivity(&vals, rgrid.nodes(), rgrid, params.theta))
}

/// `( int (r^-lambda ||f||_{L_p(Q(0,r))})^theta dr/r )^(1/theta)` truncated to `rgrid`.
pub fn lm_lambda_norm(f: &SampledFunction, params: &MorreyParams, rgrid: &RadialGrid) -> Result<NormValue> {
    params.check_theta()?;
    let lambda = params.require_lambda()?;
    let g = radial_profile(f, &params.p, params.shape, rgrid)?;
    let vals: Vec<f64> = g.iter().zip(rgrid.nodes()).map(|(a, r)| a * r.powf(-lambda)).collect();
    let ones = vec![1.0; vals.len()];
    Ok(with_sensitivity(&vals, &ones, rgrid, params.theta))
}

/// `( sum_j (2^(-lambda j) ||f||_{L_p(B_j)})^theta )^(1/theta)` over `j_min..=j_max`.
pub fn lm_dyadic_norm(f: &SampledFunction, params: &MorreyParams, j_min: i32, j_max: i32) -> Result<f64> {
    params.check_theta()?;
    let lambda = params.require_lambda()?;
    if j_min > j_max {
        return Err(Error::param("dyadic range is empty"));
    }
    let grid = *f.grid();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let terms: Vec<f64> = (j_min..=j_max)
        .into_par_iter()
        .map(|j| {
            let r = (j as f64).exp2();
            let w = RegionWeights::ball(&grid, r);
            r.powf(-lambda) * iterated_norm(&grid, &abs, params.p.entries(), &w)
        })
        .collect();
    Ok(lp_sum(&terms, params.theta))
}

/// `( sum_j 2^(j alpha p) ||f chi_j||_{L_q}^p )^(1/p)` with annuli
/// `A_j = B(2^j) \ B(2^(j-1))`, `j_min..=j_max`.
pub fn herz_norm(f: &SampledFunction, alpha: f64, outer_p: f64, q: &MixedExponent, j_min: i32, j_max: i32) -> Result<f64> {
    if !(outer_p > 0.0) {
        return Err(Error::param("outer exponent must be positive"));
    }
    if j_min > j_max {
        return Err(Error::param("dyadic range is empty"));
    }
    let grid = *f.grid();
    if q.len() != grid.dim() {
        return Err(Error::param("exponent length does not match the grid dimension"));
    }
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    let terms: Vec<f64> = (j_min..=j_max)
        .into_par_iter()
        .map(|j| {
            let r = (j as f64).exp2();
            let w = RegionWeights::annulus(&grid, r / 2.0, r);
            (j as f64 * alpha).exp2() * iterated_norm(&grid, &abs, q.entries(), &w)
        })
        .collect();
    Ok(lp_sum(&terms, outer_p))
}

fn lp_sum(terms: &[f64], p: f64) -> f64 {
    let scale = terms.iter().fold(0.0f64, |a, b| a.max(*b));
    if p.is_infinite() || scale == 0.0 {
        return scale;
    }
    scale * terms.iter().map(|t| (t / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Weighted norm of the heat maximal function `sup_t |e^{t Laplacian} f|`.
pub fn hlm_norm(f: &SampledFunction, params: &MorreyParams, rgrid: &RadialGrid, t_grid: &[f64]) -> Result<NormValue> {
    let sup = heat_sup(f, t_grid)?;
    lm_norm(&sup.function, params, rgrid)
}
