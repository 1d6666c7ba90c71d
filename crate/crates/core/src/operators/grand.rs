use super::heat::{separable_convolve, AxisKernel};
use crate::error::{Error, Result};
use crate::sampled::{Grid, SampledFunction};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Highest derivative order supported by the finite-difference seminorm.
pub const MAX_SEMINORM_ORDER: usize = 3;

/// Central difference of order `order` along one axis; nodes whose stencil
/// leaves the grid get the value zero.
fn axis_derivative(grid: &Grid, values: &[f64], axis: usize, order: usize) -> Vec<f64> {
    if order == 0 {
        return values.to_vec();
    }
    let m = grid.points();
    let h = grid.spacing();
    let stride = m.pow(axis as u32);
    let (reach, stencil, denom): (usize, &[f64], f64) = match order {
        1 => (1, &[-0.5, 0.0, 0.5], h),
        2 => (1, &[1.0, -2.0, 1.0], h * h),
        _ => (2, &[-0.5, 1.0, 0.0, -1.0, 0.5], h * h * h),
    };
    (0..grid.len())
        .map(|idx| {
            let i = (idx / stride) % m;
            if i < reach || i + reach >= m {
                return 0.0;
            }
            let base = idx - i * stride;
            let mut acc = 0.0;
            for (s, c) in stencil.iter().enumerate() {
                acc += c * values[base + (i + s - reach) * stride];
            }
            acc / denom
        })
        .collect()
}

fn multi_indices(dim: usize, max_order: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..=max_order {
        for b in 0..=(if dim > 1 { max_order - a } else { 0 }) {
            for c in 0..=(if dim > 2 { max_order - a - b } else { 0 }) {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// `sum_{|alpha| <= N} sup_x (1+|x|)^N |d^alpha phi(x)|` by central differences.
pub fn rho_n(phi: &SampledFunction, order: usize) -> Result<f64> {
    if order > MAX_SEMINORM_ORDER {
        return Err(Error::Unsupported(format!(
            "seminorm order {order} exceeds the finite-difference cap {MAX_SEMINORM_ORDER}"
        )));
    }
    let grid = *phi.grid();
    let weights: Vec<f64> = (0..grid.len()).map(|i| (1.0 + grid.radius(i)).powi(order as i32)).collect();
    let total = multi_indices(grid.dim(), order)
        .par_iter()
        .map(|alpha| {
            let mut d = phi.values().to_vec();
            for (axis, &k) in alpha.iter().enumerate().take(grid.dim()) {
                d = axis_derivative(&grid, &d, axis, k);
            }
            d.iter().zip(&weights).fold(0.0f64, |acc, (v, w)| acc.max(v.abs() * w))
        })
        .sum();
    Ok(total)
}

/// Shape of a test-family member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    /// `exp(-|x/d|^2)`.
    Gaussian,
    /// `prod_i cos^2(pi x_i / (2d))` on the cube `|x_i| < d`.
    Cosine,
}

/// One test function `phi / rho_N(phi)` with its dilation `d`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestMember {
    pub kind: BumpKind,
    pub dilation: f64,
    /// Seminorm of the unnormalized profile.
    pub rho: f64,
}

impl TestMember {
    fn raw_value(&self, x: &[f64]) -> f64 {
        let d = self.dilation;
        match self.kind {
            BumpKind::Gaussian => (-x.iter().map(|v| (v / d).powi(2)).sum::<f64>()).exp(),
            BumpKind::Cosine => x
                .iter()
                .map(|v| if v.abs() < d { (PI * v / (2.0 * d)).cos().powi(2) } else { 0.0 })
                .product(),
        }
    }

    /// Normalized member sampled on `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<SampledFunction> {
        SampledFunction::from_fn(*grid, |x| self.raw_value(x) / self.rho)
    }

    /// Continuous integral of the normalized member.
    pub fn mass(&self, dim: usize) -> f64 {
        let per_axis = match self.kind {
            BumpKind::Gaussian => PI.sqrt() * self.dilation,
            BumpKind::Cosine => self.dilation,
        };
        per_axis.powi(dim as i32) / self.rho
    }

    /// One-axis kernel of the member dilated by `tau`, unit discrete mass.
    fn kernel(&self, grid: &Grid, tau: f64) -> AxisKernel {
        match self.kind {
            BumpKind::Gaussian => AxisKernel::gaussian(grid, self.dilation * tau),
            BumpKind::Cosine => AxisKernel::cosine(grid, self.dilation * tau),
        }
    }
}

/// Finite surrogate for the unit ball of the seminorm `rho_N`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestFamily {
    pub dim: usize,
    pub order: usize,
    pub members: Vec<TestMember>,
}

impl TestFamily {
    /// Gaussian and cosine bumps at dilations 1 and 2, each divided by its seminorm.
    pub fn standard(dim: usize, order: usize) -> Result<Self> {
        let points = match dim {
            1 => 1025,
            2 => 257,
            _ => 97,
        };
        let grid = Grid::new(dim, 8.0, points)?;
        let mut members = Vec::new();
        for kind in [BumpKind::Gaussian, BumpKind::Cosine] {
            for dilation in [1.0, 2.0] {
                let mut m = TestMember { kind, dilation, rho: 1.0 };
                m.rho = rho_n(&m.sample(&grid)?, order)?;
                members.push(m);
            }
        }
        Ok(TestFamily { dim, order, members })
    }

    /// Constant `C1` with `heat_sup(f) <= C1 * grand_maximal(f)` when the scale
    /// grid holds `2 sqrt(t)` for each heat time `t`.
    pub fn heat_constant(&self) -> Result<f64> {
        let g = self
            .members
            .iter()
            .find(|m| m.kind == BumpKind::Gaussian && m.dilation == 1.0)
            .ok_or_else(|| Error::param("family has no unit Gaussian member"))?;
        Ok(g.rho / PI.powf(self.dim as f64 / 2.0))
    }

    /// Constant `C2` with `grand_maximal(f) <= C2 * hl_maximal(f)` on `grid`.
    ///
    /// Every kernel is a nonnegative tensor product of unimodal taps, so it is
    /// dominated by `mass * c(L) c(0)^(n-1)` on the sup-norm shell of radius `L`.
    /// Summing that envelope against shell counts bounds the convolution by
    /// the window averages that the maximal function already takes.
    pub fn maximal_bound(&self, grid: &Grid, scales: &[f64]) -> f64 {
        let n = grid.dim() as i32;
        let mut worst = 0.0f64;
        for member in &self.members {
            for &tau in scales {
                let k = member.kernel(grid, tau);
                let c0 = k.tap(0);
                let mut sum = 0.0;
                for (l, c) in k.taps.iter().enumerate() {
                    let shell = ((2 * l + 1) as f64).powi(n) - if l == 0 { 0.0 } else { ((2 * l - 1) as f64).powi(n) };
                    sum += shell * c * c0.powi(n - 1);
                }
                worst = worst.max(member.mass(grid.dim()) * sum);
            }
        }
        worst
    }

    pub fn seminorms(&self) -> Vec<f64> {
        self.members.iter().map(|m| m.rho).collect()
    }
}

/// Lower bound of the grand maximal function over a finite family and scale set:
/// `max_{phi, tau} |phi_tau * f|` with `phi_tau = tau^{-n} phi(./tau)`.
pub fn grand_maximal(f: &SampledFunction, family: &TestFamily, scale_grid: &[f64]) -> Result<SampledFunction> {
    if family.members.is_empty() {
        return Err(Error::param("test family is empty"));
    }
    if scale_grid.is_empty() || scale_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::param("scale grid must be a nonempty list of positive reals"));
    }
    if family.dim != f.grid().dim() {
        return Err(Error::GridMismatch("test family dimension differs from the grid".into()));
    }
    let grid = *f.grid();
    let jobs: Vec<(&TestMember, f64)> =
        family.members.iter().flat_map(|m| scale_grid.iter().map(move |&t| (m, t))).collect();
    let out = jobs
        .par_iter()
        .map(|(member, tau)| {
            let conv = separable_convolve(&grid, f.values(), &member.kernel(&grid, *tau));
            let mass = member.mass(grid.dim());
            conv.into_iter().map(|v| (v * mass).abs()).collect::<Vec<f64>>()
        })
        .reduce(
            || vec![0.0; grid.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x = x.max(y);
                }
                a
            },
        );
    Ok(SampledFunction::from_raw(grid, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{heat_sup, hl_maximal, log_times};
    use crate::sampled::{sample, FunctionSpec};

    #[test]
    fn seminorm_examples() {
        let g = Grid::new(1, 8.0, 4097).unwrap();
        let phi = sample(&FunctionSpec::Gaussian { scale: 1.0 }, &g).unwrap();
        assert!((rho_n(&phi, 0).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(rho_n(&SampledFunction::zeros(g), 2).unwrap(), 0.0);
        // Dense evaluation of both suprema in closed form.
        let xs: Vec<f64> = (0..200_001).map(|i| i as f64 * 4e-5).collect();
        let a = xs.iter().fold(0.0f64, |m, x| m.max((1.0 + x) * (-x * x).exp()));
        let b = xs.iter().fold(0.0f64, |m, x| m.max((1.0 + x) * 2.0 * x * (-x * x).exp()));
        let r1 = rho_n(&phi, 1).unwrap();
        assert!((r1 - (a + b)).abs() < 1e-4, "{r1} {}", a + b);
        assert!((r1 - 2.7218).abs() < 1e-3);
        assert!(matches!(rho_n(&phi, 4), Err(Error::Unsupported(_))));
    }

    #[test]
    fn family_members_normalized() {
        let fam = TestFamily::standard(1, 1).unwrap();
        assert_eq!(fam.members.len(), 4);
        let g = Grid::new(1, 8.0, 1025).unwrap();
        for m in &fam.members {
            let r = rho_n(&m.sample(&g).unwrap(), 1).unwrap();
            assert!((r - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn domination_chain_2d() {
        let g = Grid::new(2, 4.0, 65).unwrap();
        let f = sample(&FunctionSpec::cube(&[0.5, -0.25], 0.75), &g).unwrap();
        let fam = TestFamily::standard(2, 1).unwrap();
        let ts = log_times(0.005, 2.0, 9).unwrap();
        let scales: Vec<f64> = ts.iter().map(|t| 2.0 * t.sqrt()).collect();
        let hs = heat_sup(&f, &ts).unwrap().function;
        let gm = grand_maximal(&f, &fam, &scales).unwrap();
        let m = hl_maximal(&f);
        let c1 = fam.heat_constant().unwrap();
        let c2 = fam.maximal_bound(&g, &scales);
        for i in 0..g.len() {
            assert!(hs.values()[i] <= c1 * gm.values()[i] * (1.0 + 1e-12) + 1e-15);
            assert!(gm.values()[i] <= c2 * m.values()[i] * (1.0 + 1e-12) + 1e-15);
        }
    }

    #[test]
    fn positivity_and_zero() {
        let g = Grid::new(1, 4.0, 65).unwrap();
        let fam = TestFamily::standard(1, 1).unwrap();
        assert!(grand_maximal(&SampledFunction::zeros(g), &fam, &[0.5]).unwrap().is_zero());
        let f = sample(&FunctionSpec::centered_cube(1, 0.5), &g).unwrap();
        let gm = grand_maximal(&f, &fam, &[0.25, 1.0, 4.0]).unwrap();
        assert!(gm.values().iter().all(|v| *v > 0.0));
        let empty = TestFamily { dim: 1, order: 1, members: vec![] };
        assert!(grand_maximal(&f, &empty, &[1.0]).is_err());
    }
}
