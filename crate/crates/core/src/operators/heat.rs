use crate::error::{Error, Result};
use crate::sampled::{Grid, SampledFunction};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Symmetric one-axis kernel `c[|k|]`, normalized so that `sum_k c[|k|] = 1`
/// over the full truncated support. Offsets past the grid span are dropped
/// after normalization since they never reach another node.
#[derive(Debug, Clone)]
pub(crate) struct AxisKernel {
    pub(crate) taps: Vec<f64>,
}

impl AxisKernel {
    /// `exp(-(k h / s)^2)` for `|k h| < 4 s`.
    pub(crate) fn gaussian(grid: &Grid, s: f64) -> Self {
        let h = grid.spacing();
        let reach = 4.0 * s;
        Self::build(grid, |x| if x < reach { (-(x / s).powi(2)).exp() } else { 0.0 }, reach / h)
    }

    /// `cos^2(pi x / (2 d))` for `|x| < d`.
    pub(crate) fn cosine(grid: &Grid, d: f64) -> Self {
        let h = grid.spacing();
        Self::build(
            grid,
            |x| if x < d { (std::f64::consts::FRAC_PI_2 * x / d).cos().powi(2) } else { 0.0 },
            d / h,
        )
    }

    fn build(grid: &Grid, profile: impl Fn(f64) -> f64, reach_in_steps: f64) -> Self {
        let h = grid.spacing();
        let full = reach_in_steps.ceil().max(0.0) as usize;
        let mut norm = profile(0.0);
        let mut taps = vec![profile(0.0)];
        for k in 1..=full {
            let v = profile(k as f64 * h);
            norm += 2.0 * v;
            if k < grid.points() {
                taps.push(v);
            }
        }
        if norm <= 0.0 {
            return AxisKernel { taps: vec![1.0] };
        }
        for t in &mut taps {
            *t /= norm;
        }
        while taps.len() > 1 && *taps.last().unwrap() == 0.0 {
            taps.pop();
        }
        AxisKernel { taps }
    }

    pub(crate) fn tap(&self, k: usize) -> f64 {
        self.taps.get(k).copied().unwrap_or(0.0)
    }
}

/// Separable convolution with the same kernel on each axis; zeros outside the grid.
pub(crate) fn separable_convolve(grid: &Grid, values: &[f64], kernel: &AxisKernel) -> Vec<f64> {
    let dim = grid.dim();
    let m = grid.points();
    let taps = &kernel.taps;
    let reach = taps.len() - 1;
    let mut current = values.to_vec();
    for axis in 0..dim {
        let stride = m.pow(axis as u32);
        let src = &current;
        let next: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let i = (idx / stride) % m;
                let base = idx - i * stride;
                let lo = i.saturating_sub(reach);
                let hi = (i + reach).min(m - 1);
                let mut acc = 0.0;
                for j in lo..=hi {
                    acc += taps[i.abs_diff(j)] * src[base + j * stride];
                }
                acc
            })
            .collect();
        current = next;
    }
    current
}

/// Result of a heat evaluation together with its resolution flag.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeatOutput {
    pub function: SampledFunction,
    /// Set when some `sqrt(t)` falls below the grid spacing, so the kernel is
    /// narrower than one cell and the output is close to the input.
    pub sub_resolution: bool,
}

fn heat_values(f: &SampledFunction, t: f64) -> Result<Vec<f64>> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::param(format!("heat time must be positive, got {t}")));
    }
    let kernel = AxisKernel::gaussian(f.grid(), 2.0 * t.sqrt());
    Ok(separable_convolve(f.grid(), f.values(), &kernel))
}

/// `e^{t Laplacian} f` by discrete convolution with the sampled Gaussian,
/// truncated at `8 sqrt(t)` per axis and renormalized to unit mass.
pub fn heat(f: &SampledFunction, t: f64) -> Result<HeatOutput> {
    let values = heat_values(f, t)?;
    Ok(HeatOutput {
        function: SampledFunction::from_raw(*f.grid(), values),
        sub_resolution: t.sqrt() < f.grid().spacing(),
    })
}

/// Pointwise `max_t |e^{t Laplacian} f|` over the given times.
pub fn heat_sup(f: &SampledFunction, t_grid: &[f64]) -> Result<HeatOutput> {
    if t_grid.is_empty() {
        return Err(Error::param("time grid is empty"));
    }
    let runs: Vec<Vec<f64>> = t_grid.iter().map(|&t| heat_values(f, t)).collect::<Result<_>>()?;
    let mut out = vec![0.0f64; f.grid().len()];
    for run in &runs {
        for (o, v) in out.iter_mut().zip(run) {
            *o = o.max(v.abs());
        }
    }
    let h = f.grid().spacing();
    Ok(HeatOutput {
        function: SampledFunction::from_raw(*f.grid(), out),
        sub_resolution: t_grid.iter().any(|t| t.sqrt() < h),
    })
}

/// `count` log-uniform times from `t_min` to `t_max` inclusive.
pub fn log_times(t_min: f64, t_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max >= t_min && count >= 1) {
        return Err(Error::param("time range must satisfy 0 < t_min <= t_max with at least one point"));
    }
    if count == 1 {
        return Ok(vec![t_min]);
    }
    let step = (t_max / t_min).ln() / (count - 1) as f64;
    Ok((0..count).map(|i| t_min * (step * i as f64).exp()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::{sample, FunctionSpec};

    #[test]
    fn gaussian_closed_form() {
        let g = Grid::new(1, 12.0, 961).unwrap();
        let f = sample(&FunctionSpec::Gaussian { scale: 1.0 }, &g).unwrap();
        for t in [0.01, 0.1, 0.5, 2.0] {
            let out = heat(&f, t).unwrap();
            assert!(!out.sub_resolution);
            for (i, v) in out.function.values().iter().enumerate() {
                let x = g.coord(i);
                let exact = (1.0 + 4.0 * t).powf(-0.5) * (-x * x / (1.0 + 4.0 * t)).exp();
                assert!((v - exact).abs() <= 0.01 * exact.max(1e-3), "t={t} x={x} {v} {exact}");
            }
        }
    }

    #[test]
    fn constants_and_mass() {
        let g = Grid::new(2, 4.0, 65).unwrap();
        let c = SampledFunction::constant(g, 2.5).unwrap();
        let out = heat(&c, 0.05).unwrap().function;
        let mid = g.ravel(&[32, 32]);
        assert!((out.values()[mid] - 2.5).abs() < 1e-12);
        let bump = sample(&FunctionSpec::centered_cube(2, 1.0), &g).unwrap();
        let out = heat(&bump, 0.1).unwrap().function;
        let before: f64 = bump.values().iter().sum();
        let after: f64 = out.values().iter().sum();
        assert!((before - after).abs() <= 1e-8 * before);
    }

    #[test]
    fn tiny_time_is_flagged_identity() {
        let g = Grid::new(1, 2.0, 33).unwrap();
        let f = sample(&FunctionSpec::centered_cube(1, 1.0), &g).unwrap();
        let out = heat(&f, 1e-6).unwrap();
        assert!(out.sub_resolution);
        for (a, b) in out.function.values().iter().zip(f.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sup_over_single_time_is_abs() {
        let g = Grid::new(1, 3.0, 49).unwrap();
        let f = SampledFunction::from_fn(g, |x| x[0].sin()).unwrap();
        let one = heat(&f, 0.2).unwrap().function.abs();
        let sup = heat_sup(&f, &[0.2]).unwrap().function;
        assert_eq!(one.values(), sup.values());
        assert!(heat_sup(&SampledFunction::zeros(g), &[0.1, 1.0]).unwrap().function.is_zero());
    }

    #[test]
    fn log_times_endpoints() {
        let t = log_times(0.01, 1.0, 5).unwrap();
        assert_eq!(t.len(), 5);
        assert!((t[4] - 1.0).abs() < 1e-12 && (t[2] - 0.1).abs() < 1e-12);
    }
}
