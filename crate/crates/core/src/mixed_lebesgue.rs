//! Iterated mixed Lebesgue norms with `x_1` innermost.
//!
//! Quadrature model: node `x` owns the cell `[x - h/2, x + h/2]^n` clipped to
//! the grid box. Over the full grid this is the trapezoid rule. A region
//! weights each node by the measure of its cell inside the region; for cubes
//! this factorizes per axis, for balls a per-node volume fraction is applied
//! at the innermost finite level. Regions larger than the grid saturate to the
//! full grid because sampled functions vanish outside it.

use crate::error::{Error, Result};
use crate::sampled::{Grid, SampledFunction};
use serde::{Deserialize, Serialize};

/// Exponent vector `(p_1, ..., p_n)` with entries in `(0, inf]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MixedExponent(#[serde(with = "crate::serde_ext::ext_vec")] Vec<f64>);

impl MixedExponent {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() || entries.len() > 3 {
            return Err(Error::param("mixed exponent needs between 1 and 3 entries"));
        }
        if entries.iter().any(|p| p.is_nan() || *p <= 0.0) {
            return Err(Error::param(format!("exponent entries must be positive, got {entries:?}")));
        }
        Ok(MixedExponent(entries))
    }

    /// The same exponent repeated `dim` times.
    pub fn uniform(p: f64, dim: usize) -> Result<Self> {
        Self::new(vec![p; dim])
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check_dim(&self, grid: &Grid) -> Result<()> {
        if self.0.len() != grid.dim() {
            return Err(Error::param(format!(
                "exponent has {} entries but the grid has dimension {}",
                self.0.len(),
                grid.dim()
            )));
        }
        Ok(())
    }
}

/// `sum 1/p_i` with `1/inf = 0`.
pub fn power_sum(p: &MixedExponent) -> f64 {
    p.0.iter().map(|q| if q.is_infinite() { 0.0 } else { 1.0 / q }).sum()
}

/// Entry-wise conjugate exponent.
pub fn dual_exponent(p: &MixedExponent) -> Result<MixedExponent> {
    let e = p
        .0
        .iter()
        .map(|&q| conjugate(q))
        .collect::<Result<Vec<_>>>()?;
    MixedExponent::new(e)
}

/// Conjugate of a scalar exponent in `[1, inf]`.
pub fn conjugate(q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::param(format!("exponent {q} below 1 has no conjugate")));
    }
    Ok(if q == 1.0 {
        f64::INFINITY
    } else if q.is_infinite() {
        1.0
    } else {
        q / (q - 1.0)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    #[default]
    Cube,
    Ball,
}

/// Origin-centered cube `Q(0, r)` or ball `B(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub shape: Shape,
    pub radius: f64,
}

impl Region {
    pub fn cube(radius: f64) -> Self {
        Region { shape: Shape::Cube, radius }
    }

    pub fn ball(radius: f64) -> Self {
        Region { shape: Shape::Ball, radius }
    }
}

/// Node weights of a region: one factor per axis, times an optional per-node
/// fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionWeights {
    pub(crate) axis: Vec<Vec<f64>>,
    pub(crate) fraction: Option<Vec<f64>>,
}

fn cell_bounds(grid: &Grid, i: usize) -> (f64, f64) {
    let h = grid.spacing();
    let x = grid.coord(i);
    let r = grid.half_width();
    ((x - 0.5 * h).max(-r), (x + 0.5 * h).min(r))
}

fn overlap(a: (f64, f64), r: f64) -> f64 {
    (a.1.min(r) - a.0.max(-r)).max(0.0)
}

fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => 4.0 * std::f64::consts::PI / 3.0,
    }
}

/// Samples per axis when a ball boundary cuts a cell.
fn subsamples(dim: usize) -> usize {
    match dim {
        1 => 1,
        2 => 16,
        _ => 8,
    }
}

impl RegionWeights {
    /// Trapezoid weights over the whole grid.
    pub fn full(grid: &Grid) -> Self {
        let axis = (0..grid.dim())
            .map(|_| (0..grid.points()).map(|i| { let c = cell_bounds(grid, i); c.1 - c.0 }).collect())
            .collect();
        RegionWeights { axis, fraction: None }
    }

    /// Weights of `Q(0, r)`.
    pub fn cube(grid: &Grid, r: f64) -> Self {
        let col: Vec<f64> = (0..grid.points()).map(|i| overlap(cell_bounds(grid, i), r)).collect();
        RegionWeights { axis: vec![col; grid.dim()], fraction: None }
    }

    /// Weights of `B(r)`: full cell lengths per axis plus the fraction of each
    /// cell inside the ball.
    pub fn ball(grid: &Grid, r: f64) -> Self {
        let full = Self::full(grid);
        RegionWeights { axis: full.axis, fraction: Some(ball_fractions(grid, r)) }
    }

    pub fn region(grid: &Grid, region: Region) -> Self {
        match region.shape {
            Shape::Cube => Self::cube(grid, region.radius),
            Shape::Ball => Self::ball(grid, region.radius),
        }
    }

    /// Weights of the annulus `B(outer) \ B(inner)`.
    pub fn annulus(grid: &Grid, inner: f64, outer: f64) -> Self {
        let full = Self::full(grid);
        let a = ball_fractions(grid, outer);
        let b = ball_fractions(grid, inner);
        let frac = a.iter().zip(&b).map(|(x, y)| (x - y).max(0.0)).collect();
        RegionWeights { axis: full.axis, fraction: Some(frac) }
    }

    /// Per-node effective measure (product of axis weights and fraction).
    pub fn node_measure(&self, grid: &Grid, idx: usize) -> f64 {
        let ix = grid.unravel(idx);
        let mut w = 1.0;
        for a in 0..grid.dim() {
            w *= self.axis[a][ix[a]];
        }
        if let Some(fr) = &self.fraction {
            w *= fr[idx];
        }
        w
    }
}

/// Fraction of each (clipped) cell lying in the closed ball of radius `r`.
pub(crate) fn ball_fractions(grid: &Grid, r: f64) -> Vec<f64> {
    let n = grid.dim();
    let len = grid.len();
    if r <= 0.0 {
        return vec![0.0; len];
    }
    let bounds: Vec<(f64, f64)> = (0..grid.points()).map(|i| cell_bounds(grid, i)).collect();
    if n == 1 {
        return bounds.iter().map(|b| overlap(*b, r) / (b.1 - b.0)).collect();
    }
    let k = subsamples(n);
    let r2 = r * r;
    (0..len)
        .map(|idx| {
            let ix = grid.unravel(idx);
            let mut near = 0.0;
            let mut far = 0.0;
            let mut inside_box = true;
            let mut vol = 1.0;
            for a in 0..n {
                let (lo, hi) = bounds[ix[a]];
                let d = if lo > 0.0 { lo } else if hi < 0.0 { -hi } else { 0.0 };
                near += d * d;
                let f = lo.abs().max(hi.abs());
                far += f * f;
                inside_box &= lo <= -r && hi >= r;
                vol *= hi - lo;
            }
            if far <= r2 {
                1.0
            } else if near >= r2 {
                0.0
            } else if inside_box {
                unit_ball_volume(n) * r.powi(n as i32) / vol
            } else {
                let mut hit = 0usize;
                let mut total = 0usize;
                let (lo0, hi0) = bounds[ix[0]];
                let (lo1, hi1) = bounds[ix[1]];
                let (lo2, hi2) = if n == 3 { bounds[ix[2]] } else { (0.0, 0.0) };
                let kz = if n == 3 { k } else { 1 };
                for c in 0..kz {
                    let z = if n == 3 { lo2 + (c as f64 + 0.5) * (hi2 - lo2) / k as f64 } else { 0.0 };
                    for b in 0..k {
                        let y = lo1 + (b as f64 + 0.5) * (hi1 - lo1) / k as f64;
                        for a in 0..k {
                            let x = lo0 + (a as f64 + 0.5) * (hi0 - lo0) / k as f64;
                            total += 1;
                            if x * x + y * y + z * z <= r2 {
                                hit += 1;
                            }
                        }
                    }
                }
                hit as f64 / total as f64
            }
        })
        .collect()
}

/// Iterated norm of nonnegative node values with the given weights.
pub(crate) fn iterated_norm(grid: &Grid, values: &[f64], p: &[f64], weights: &RegionWeights) -> f64 {
    let m = grid.points();
    let mut cur: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let mut frac = weights.fraction.clone();
    for (level, &q) in p.iter().enumerate().take(grid.dim()) {
        let wa = &weights.axis[level];
        let lines = cur.len() / m;
        let mut next = vec![0.0; lines];
        let mut next_frac = if q.is_infinite() { frac.as_ref().map(|_| vec![0.0; lines]) } else { None };
        for line in 0..lines {
            let base = line * m;
            let seg = &cur[base..base + m];
            let fseg = frac.as_ref().map(|f| &f[base..base + m]);
            if q.is_infinite() {
                let mut best = 0.0f64;
                let mut fbest = 0.0f64;
                for i in 0..m {
                    let fr = fseg.map_or(1.0, |f| f[i]);
                    if wa[i] > 0.0 && fr > 0.0 {
                        best = best.max(seg[i]);
                        fbest = fbest.max(fr);
                    }
                }
                next[line] = best;
                if let Some(nf) = next_frac.as_mut() {
                    nf[line] = fbest;
                }
            } else {
                let scale = seg.iter().fold(0.0f64, |a, &b| a.max(b));
                if scale == 0.0 {
                    continue;
                }
                let mut s = 0.0;
                for i in 0..m {
                    let w = wa[i] * fseg.map_or(1.0, |f| f[i]);
                    if w > 0.0 && seg[i] > 0.0 {
                        s += w * (seg[i] / scale).powf(q);
                    }
                }
                next[line] = scale * s.powf(1.0 / q);
            }
        }
        cur = next;
        frac = next_frac;
    }
    cur[0]
}

/// Mixed norm with precomputed weights.
pub fn norm_with_weights(f: &SampledFunction, p: &MixedExponent, weights: &RegionWeights) -> Result<f64> {
    p.check_dim(f.grid())?;
    Ok(iterated_norm(f.grid(), f.values(), p.entries(), weights))
}

/// Mixed norm of `f` over `region` (whole grid when `None`).
pub fn mixed_norm(f: &SampledFunction, p: &MixedExponent, region: Option<Region>) -> Result<f64> {
    p.check_dim(f.grid())?;
    let w = match region {
        None => RegionWeights::full(f.grid()),
        Some(reg) => {
            if !(reg.radius > 0.0) || reg.radius > f.grid().half_width() * (1.0 + 1e-12) {
                return Err(Error::param(format!(
                    "region radius {} must lie in (0, {}]",
                    reg.radius,
                    f.grid().half_width()
                )));
            }
            RegionWeights::region(f.grid(), reg)
        }
    };
    Ok(iterated_norm(f.grid(), f.values(), p.entries(), &w))
}

/// Like [`mixed_norm`] but accepts radii beyond the grid, where the region
/// saturates to the full grid.
pub fn mixed_norm_saturating(f: &SampledFunction, p: &MixedExponent, region: Region) -> Result<f64> {
    p.check_dim(f.grid())?;
    let w = RegionWeights::region(f.grid(), region);
    Ok(iterated_norm(f.grid(), f.values(), p.entries(), &w))
}

/// Trapezoid integral of `f * g` over the grid.
pub fn integral_of_product(f: &SampledFunction, g: &SampledFunction) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch("integrand factors on different grids".into()));
    }
    let w = RegionWeights::full(f.grid());
    let grid = f.grid();
    Ok((0..grid.len()).map(|i| w.node_measure(grid, i) * f.values()[i] * g.values()[i]).sum())
}

/// Trapezoid integral of `f` over the grid.
pub fn integral(f: &SampledFunction) -> f64 {
    let w = RegionWeights::full(f.grid());
    let grid = f.grid();
    (0..grid.len()).map(|i| w.node_measure(grid, i) * f.values()[i]).sum()
}
