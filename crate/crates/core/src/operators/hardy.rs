use crate::error::{Error, Result};
use crate::morrey_herz::{RadialGrid, RadialWeight};
use crate::sampled::SampledFunction;
use serde::{Deserialize, Serialize};

/// A function on `(0, inf)` sampled at increasing positive nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialFunction {
    nodes: Vec<f64>,
    values: Vec<f64>,
}

impl RadialFunction {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != values.len() {
            return Err(Error::param("radial function needs matching, nonempty node and value lists"));
        }
        if nodes[0] <= 0.0 || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("radial nodes must be positive and strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("radial values must be finite"));
        }
        Ok(RadialFunction { nodes, values })
    }

    pub fn from_fn(rgrid: &RadialGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let nodes = rgrid.nodes().to_vec();
        let values = nodes.iter().map(|&r| f(r)).collect();
        Self::new(nodes, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Keep only the nodes with index `< end`.
    pub fn truncated(&self, end: usize) -> Result<Self> {
        Self::new(self.nodes[..end].to_vec(), self.values[..end].to_vec())
    }
}

/// `H g(r) = int_0^r g`, with `g` extended as a constant on `(0, r_0)`.
pub fn hardy(g: &RadialFunction) -> RadialFunction {
    let n = g.len();
    let mut out = vec![0.0; n];
    out[0] = g.values[0] * g.nodes[0];
    for k in 1..n {
        out[k] = out[k - 1] + 0.5 * (g.values[k - 1] + g.values[k]) * (g.nodes[k] - g.nodes[k - 1]);
    }
    RadialFunction { nodes: g.nodes.clone(), values: out }
}

/// `H* g(r) = int_r^inf g` with the tail beyond the last node taken as zero.
/// The second value is the relative change at the first node when the last
/// octave of data is discarded.
pub fn hardy_dual(g: &RadialFunction) -> (RadialFunction, f64) {
    let n = g.len();
    let mut out = vec![0.0; n];
    for k in (0..n - 1).rev() {
        out[k] = out[k + 1] + 0.5 * (g.values[k] + g.values[k + 1]) * (g.nodes[k + 1] - g.nodes[k]);
    }
    let last = g.nodes[n - 1];
    let cut = g.nodes.iter().position(|&r| r >= last / 2.0).unwrap_or(n - 1);
    let scale = out.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let sens = if scale > 0.0 { out[cut].abs() / scale } else { 0.0 };
    (RadialFunction { nodes: g.nodes.clone(), values: out }, sens)
}

/// `|| v g ||_{L_theta(dr)}` by the trapezoid rule in `r`.
pub fn weighted_theta_norm(g: &RadialFunction, theta: f64, v: &RadialWeight) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(Error::param("outer exponent must be positive"));
    }
    let w = v.eval_many(&g.nodes)?;
    let vals: Vec<f64> = g.values.iter().zip(&w).map(|(a, b)| (a * b).abs()).collect();
    let scale = vals.iter().fold(0.0f64, |a, b| a.max(*b));
    if theta.is_infinite() || scale == 0.0 {
        return Ok(scale);
    }
    let mut s = 0.0;
    for k in 1..vals.len() {
        let a = (vals[k - 1] / scale).powf(theta);
        let b = (vals[k] / scale).powf(theta);
        s += 0.5 * (a + b) * (g.nodes[k] - g.nodes[k - 1]);
    }
    Ok(scale * s.powf(1.0 / theta))
}

/// Average of `f` over the nodes of the closed ball `B(|x|)`; `f(0)` at the origin.
pub fn hardy_nd(f: &SampledFunction) -> SampledFunction {
    let grid = *f.grid();
    let n = grid.len();
    let radii: Vec<f64> = (0..n).map(|i| grid.radius(i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| radii[a].partial_cmp(&radii[b]).unwrap().then(a.cmp(&b)));
    let tol = 1e-9 * grid.spacing();
    let mut out = vec![0.0; n];
    let mut start = 0;
    let mut sum = 0.0;
    while start < n {
        let r0 = radii[order[start]];
        let mut end = start;
        while end < n && radii[order[end]] <= r0 + tol {
            sum += f.values()[order[end]];
            end += 1;
        }
        let avg = sum / end as f64;
        for &i in &order[start..end] {
            out[i] = avg;
        }
        start = end;
    }
    SampledFunction::from_raw(grid, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::{sample, FunctionSpec, Grid};

    fn chi01(r: f64) -> f64 {
        if r < 1.0 {
            1.0
        } else if r == 1.0 {
            0.5
        } else {
            0.0
        }
    }

    #[test]
    fn hardy_of_indicator() {
        let rg = RadialGrid::new(-10, 4, 32).unwrap();
        let g = RadialFunction::from_fn(&rg, chi01).unwrap();
        // The jump sits on a node, so the error is a fraction of one step there.
        let tol = 0.3 * (2f64.powf(1.0 / 32.0) - 1.0);
        let h = hardy(&g);
        for (r, v) in h.nodes().iter().zip(h.values()) {
            assert!((v - r.min(1.0)).abs() < tol, "{r} {v}");
        }
        let (hd, _) = hardy_dual(&g);
        for (r, v) in hd.nodes().iter().zip(hd.values()) {
            assert!((v - (1.0 - r).max(0.0)).abs() < tol, "{r} {v}");
        }
    }

    #[test]
    fn hardy_of_exponential() {
        let rg = RadialGrid::new(-12, 6, 32).unwrap();
        let g = RadialFunction::from_fn(&rg, |t| (-t).exp()).unwrap();
        let h = hardy(&g);
        let (hd, sens) = hardy_dual(&g);
        for k in 0..rg.len() {
            let r = rg.nodes()[k];
            assert!((h.values()[k] - (1.0 - (-r).exp())).abs() < 1e-3);
            assert!((hd.values()[k] - (-r).exp()).abs() < 1e-3);
        }
        assert!(sens < 1e-6);
    }

    #[test]
    fn zero_maps_to_zero() {
        let rg = RadialGrid::new(-2, 2, 8).unwrap();
        let g = RadialFunction::from_fn(&rg, |_| 0.0).unwrap();
        assert!(hardy(&g).values().iter().all(|v| *v == 0.0));
        assert!(hardy_dual(&g).0.values().iter().all(|v| *v == 0.0));
        assert_eq!(weighted_theta_norm(&g, 2.0, &RadialWeight::Power { exponent: 1.0 }).unwrap(), 0.0);
    }

    #[test]
    fn weighted_norms() {
        let rg = RadialGrid::new(-20, 3, 64).unwrap();
        let g = RadialFunction::from_fn(&rg, chi01).unwrap();
        let v = weighted_theta_norm(&g, 2.0, &RadialWeight::Power { exponent: 1.0 }).unwrap();
        // Raising the half value at the jump to the power theta costs one step there.
        let step = 2f64.powf(1.0 / 64.0) - 1.0;
        assert!((v - 3f64.powf(-0.5)).abs() < step, "{v}");
        let v = weighted_theta_norm(&g, f64::INFINITY, &RadialWeight::Power { exponent: 0.0 }).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn hardy_nd_examples() {
        let g = Grid::new(1, 4.0, 257).unwrap();
        let f = sample(&FunctionSpec::BallIndicator { radius: 1.0 }, &g).unwrap();
        let hf = hardy_nd(&f);
        let h = g.spacing();
        for i in 0..g.len() {
            let x = g.coord(i).abs();
            let exact = if x <= 1.0 { 1.0 } else { 1.0 / x };
            assert!((hf.values()[i] - exact).abs() <= h, "{x}");
        }
        let c = SampledFunction::constant(Grid::new(2, 1.0, 33).unwrap(), 2.5).unwrap();
        assert!(hardy_nd(&c).values().iter().all(|v| (v - 2.5).abs() < 1e-12));
    }
}
