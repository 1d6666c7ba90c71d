//! Uniform tensor grids over centered cubes and functions sampled on them.
//!
//! Storage is flat with the first coordinate varying fastest, so node
//! `(i1, i2, i3)` lives at `i1 + m*i2 + m*m*i3`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Smallest accepted number of points per axis.
pub const MIN_POINTS: usize = 17;

/// Membership slack for boundary nodes, in units of the spacing.
pub(crate) const EDGE_SLACK: f64 = 1e-9;

/// A uniform grid over `[-R, R]^n` with an odd number of points per axis so
/// that the origin is always a node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    points: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::param(format!("grid dimension must be 1, 2 or 3, got {dim}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::param(format!("grid half width must be positive, got {half_width}")));
        }
        if points < MIN_POINTS || points % 2 == 0 {
            return Err(Error::param(format!(
                "points per axis must be odd and at least {MIN_POINTS}, got {points}"
            )));
        }
        let spacing = 2.0 * half_width / (points - 1) as f64;
        Ok(Grid { dim, half_width, points, spacing })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Total number of nodes, `m^n`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the origin along each axis.
    pub fn center_index(&self) -> usize {
        (self.points - 1) / 2
    }

    /// The grid obtained by halving the spacing (`m -> 2m - 1`).
    pub fn refined(&self) -> Grid {
        Grid::new(self.dim, self.half_width, 2 * self.points - 1).expect("refinement of a valid grid")
    }

    /// Coordinate of axis index `i`.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.center_index() as f64) * self.spacing
    }

    /// Per-axis indices of flat node `idx`; unused axes are zero.
    #[inline]
    pub fn unravel(&self, idx: usize) -> [usize; 3] {
        let m = self.points;
        let mut out = [0usize; 3];
        let mut rest = idx;
        for slot in out.iter_mut().take(self.dim) {
            *slot = rest % m;
            rest /= m;
        }
        out
    }

    #[inline]
    pub fn ravel(&self, ix: &[usize]) -> usize {
        let m = self.points;
        let mut idx = 0;
        for a in (0..self.dim).rev() {
            idx = idx * m + ix[a];
        }
        idx
    }

    /// Position of flat node `idx`; unused axes are zero.
    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let ix = self.unravel(idx);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = self.coord(ix[a]);
        }
        x
    }

    /// Euclidean norm of the position of node `idx`.
    #[inline]
    pub fn radius(&self, idx: usize) -> f64 {
        let x = self.position(idx);
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Nearest axis index to coordinate `x`, ties toward the smaller index.
    /// Returns `None` outside the grid.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let t = x / self.spacing + self.center_index() as f64;
        let lo = t.floor();
        let i = if t - lo <= 0.5 { lo } else { lo + 1.0 };
        if i < 0.0 || i > (self.points - 1) as f64 {
            None
        } else {
            Some(i as usize)
        }
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        let lim = self.half_width * (1.0 + 1e-12);
        point.len() == self.dim && point.iter().all(|x| x.abs() <= lim)
    }

    /// Largest distance from the origin to a node.
    pub fn corner_radius(&self) -> f64 {
        self.half_width * (self.dim as f64).sqrt()
    }

    pub fn same_as(&self, other: &Grid) -> bool {
        self == other
    }
}

/// Real values on every node of a grid; always finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("non-finite value at node {i}")));
        }
        Ok(SampledFunction { grid, values })
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        debug_assert!(values.iter().all(|v| v.is_finite()));
        SampledFunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        SampledFunction { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::param("constant must be finite"));
        }
        Ok(SampledFunction { grid, values: vec![c; grid.len()] })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.position(i);
                f(&x[..grid.dim()])
            })
            .collect();
        Self::from_values(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_values(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn abs(&self) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|v| v.abs()).collect())
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.map(|v| c * v)
    }

    fn check_grid(&self, other: &SampledFunction) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch("functions live on different grids".into()))
        }
    }

    pub fn add(&self, other: &SampledFunction) -> Result<Self> {
        self.check_grid(other)?;
        let v = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Self::from_values(self.grid, v)
    }

    pub fn sub(&self, other: &SampledFunction) -> Result<Self> {
        self.check_grid(other)?;
        let v = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Self::from_values(self.grid, v)
    }

    pub fn mul(&self, other: &SampledFunction) -> Result<Self> {
        self.check_grid(other)?;
        let v = self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect();
        Self::from_values(self.grid, v)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Value at the nearest node to `point`.
    pub fn evaluate(&self, point: &[f64]) -> Result<f64> {
        if !self.grid.contains(point) {
            return Err(Error::param(format!("point {point:?} lies outside the grid")));
        }
        let mut ix = [0usize; 3];
        for (a, x) in point.iter().enumerate() {
            ix[a] = self
                .grid
                .nearest_index(*x)
                .ok_or_else(|| Error::param(format!("point {point:?} lies outside the grid")))?;
        }
        Ok(self.values[self.grid.ravel(&ix)])
    }

    /// Zero every node outside the closed cube `[-r, r]^n`.
    pub fn restrict(&self, r: f64) -> Result<Self> {
        if !(r > 0.0 && r <= self.grid.half_width * (1.0 + 1e-12)) {
            return Err(Error::param(format!(
                "restriction radius {r} must lie in (0, {}]",
                self.grid.half_width
            )));
        }
        let lim = r + EDGE_SLACK * self.grid.spacing;
        let g = self.grid;
        let v = (0..g.len())
            .map(|i| {
                let x = g.position(i);
                if x[..g.dim()].iter().all(|c| c.abs() <= lim) {
                    self.values[i]
                } else {
                    0.0
                }
            })
            .collect();
        Ok(Self::from_raw(g, v))
    }

    /// Zero every node outside the closed ball `|x| <= r`.
    pub fn restrict_ball(&self, r: f64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::param(format!("restriction radius {r} must be positive")));
        }
        let lim = r + EDGE_SLACK * self.grid.spacing;
        let g = self.grid;
        let v = (0..g.len())
            .map(|i| if g.radius(i) <= lim { self.values[i] } else { 0.0 })
            .collect();
        Ok(Self::from_raw(g, v))
    }
}

/// One monomial term `coefficient * x1^e1 * x2^e2 * x3^e3`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coefficient: f64,
    pub exponents: Vec<u32>,
}

/// Analytic description of a test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// Indicator of the closed cube with the given center and half side.
    CubeIndicator { center: Vec<f64>, half_side: f64 },
    /// Indicator of the closed origin-centered ball.
    BallIndicator { radius: f64 },
    /// `exp(-|x/scale|^2)`.
    Gaussian { scale: f64 },
    /// `max(|x|, cutoff)^(-exponent)`.
    Power { exponent: f64, cutoff: f64 },
    Polynomial { terms: Vec<Monomial> },
    /// Raw node values for one particular grid.
    Table { values: Vec<f64> },
    /// Finite linear combination of other specs.
    Combination { terms: Vec<WeightedSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpec {
    pub weight: f64,
    pub spec: FunctionSpec,
}

impl FunctionSpec {
    pub fn cube(center: &[f64], half_side: f64) -> Self {
        FunctionSpec::CubeIndicator { center: center.to_vec(), half_side }
    }

    pub fn centered_cube(dim: usize, half_side: f64) -> Self {
        FunctionSpec::CubeIndicator { center: vec![0.0; dim], half_side }
    }

    /// Check parameters that do not depend on a grid.
    pub fn validate(&self) -> Result<()> {
        match self {
            FunctionSpec::CubeIndicator { center, half_side } => {
                if !(half_side.is_finite() && *half_side > 0.0) || center.iter().any(|c| !c.is_finite()) {
                    return Err(Error::param("cube indicator needs a finite center and positive half side"));
                }
            }
            FunctionSpec::BallIndicator { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::param("ball indicator needs a positive radius"));
                }
            }
            FunctionSpec::Gaussian { scale } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::param("gaussian needs a positive scale"));
                }
            }
            FunctionSpec::Power { exponent, cutoff } => {
                if !(exponent.is_finite() && *exponent > 0.0) {
                    return Err(Error::param("power spec needs a positive exponent"));
                }
                if !(cutoff.is_finite() && *cutoff > 0.0) {
                    return Err(Error::param(
                        "power spec cutoff must be positive so the origin node stays finite",
                    ));
                }
            }
            FunctionSpec::Polynomial { terms } => {
                if terms.iter().any(|t| !t.coefficient.is_finite()) {
                    return Err(Error::param("polynomial coefficients must be finite"));
                }
            }
            FunctionSpec::Table { values } => {
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::param("table values must be finite"));
                }
            }
            FunctionSpec::Combination { terms } => {
                if terms.is_empty() {
                    return Err(Error::param("combination needs at least one term"));
                }
                for t in terms {
                    if !t.weight.is_finite() {
                        return Err(Error::param("combination weights must be finite"));
                    }
                    t.spec.validate()?;
                }
            }
        }
        Ok(())
    }

    fn eval_point(&self, x: &[f64], tol: f64) -> f64 {
        match self {
            FunctionSpec::CubeIndicator { center, half_side } => {
                let inside = x.iter().zip(center).all(|(xi, ci)| (xi - ci).abs() <= half_side + tol);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionSpec::BallIndicator { radius } => {
                if norm(x) <= radius + tol {
                    1.0
                } else {
                    0.0
                }
            }
            FunctionSpec::Gaussian { scale } => {
                let r = norm(x) / scale;
                (-r * r).exp()
            }
            FunctionSpec::Power { exponent, cutoff } => norm(x).max(*cutoff).powf(-exponent),
            FunctionSpec::Polynomial { terms } => terms
                .iter()
                .map(|t| {
                    let mut v = t.coefficient;
                    for (xi, e) in x.iter().zip(&t.exponents) {
                        v *= xi.powi(*e as i32);
                    }
                    v
                })
                .sum(),
            FunctionSpec::Table { .. } => unreachable!("tables are sampled directly"),
            FunctionSpec::Combination { terms } => {
                terms.iter().map(|t| t.weight * t.spec.eval_point(x, tol)).sum()
            }
        }
    }

    fn contains_table(&self) -> bool {
        match self {
            FunctionSpec::Table { .. } => true,
            FunctionSpec::Combination { terms } => terms.iter().any(|t| t.spec.contains_table()),
            _ => false,
        }
    }

    fn check_against(&self, grid: &Grid) -> Result<()> {
        match self {
            FunctionSpec::CubeIndicator { center, .. } => {
                if center.len() != grid.dim() {
                    return Err(Error::param(format!(
                        "cube center has {} coordinates, grid has dimension {}",
                        center.len(),
                        grid.dim()
                    )));
                }
                if center.iter().any(|c| c.abs() > grid.half_width()) {
                    return Err(Error::param("cube center lies outside the grid"));
                }
            }
            FunctionSpec::Polynomial { terms } => {
                if terms.iter().any(|t| t.exponents.len() != grid.dim()) {
                    return Err(Error::param("polynomial exponent vectors must match the grid dimension"));
                }
            }
            FunctionSpec::Combination { terms } => {
                for t in terms {
                    t.spec.check_against(grid)?;
                }
            }
            _ => {}
        }
        Ok(())
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Evaluate `spec` at every node of `grid`. Indicator boundaries use
/// node-center membership with closed inequalities.
pub fn sample(spec: &FunctionSpec, grid: &Grid) -> Result<SampledFunction> {
    spec.validate()?;
    spec.check_against(grid)?;
    if let FunctionSpec::Table { values } = spec {
        return SampledFunction::from_values(*grid, values.clone());
    }
    if spec.contains_table() {
        return Err(Error::Unsupported("tables inside combinations".into()));
    }
    let tol = EDGE_SLACK * grid.spacing();
    SampledFunction::from_fn(*grid, |x| spec.eval_point(x, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1(m: usize) -> Grid {
        Grid::new(1, 4.0, m).unwrap()
    }

    #[test]
    fn grid_rejects_even_and_small() {
        assert!(Grid::new(1, 1.0, 16).is_err());
        assert!(Grid::new(1, 1.0, 18).is_err());
        assert!(Grid::new(4, 1.0, 17).is_err());
        assert!(Grid::new(2, 0.0, 17).is_err());
        assert!(Grid::new(2, 1.0, 17).is_ok());
    }

    #[test]
    fn spacing_identity_and_origin() {
        let g = Grid::new(2, 3.0, 97).unwrap();
        assert!((g.spacing() * 96.0 - 6.0).abs() < 1e-14);
        assert_eq!(g.coord(g.center_index()), 0.0);
    }

    #[test]
    fn cube_indicator_nodes() {
        let g = Grid::new(1, 4.0, 129).unwrap();
        let f = sample(&FunctionSpec::centered_cube(1, 1.0), &g).unwrap();
        for i in 0..g.len() {
            let expect = if g.coord(i).abs() <= 1.0 { 1.0 } else { 0.0 };
            assert_eq!(f.values()[i], expect);
        }
        assert_eq!(f.values().iter().sum::<f64>(), 33.0);
    }

    #[test]
    fn gaussian_and_power_values() {
        let g = g1(129);
        let f = sample(&FunctionSpec::Gaussian { scale: 1.0 }, &g).unwrap();
        assert_eq!(f.evaluate(&[0.0]).unwrap(), 1.0);
        let p = sample(&FunctionSpec::Power { exponent: 0.5, cutoff: 0.1 }, &g).unwrap();
        assert!((p.evaluate(&[0.5]).unwrap() - 1.414213562373095).abs() < 1e-12);
        assert!((p.evaluate(&[0.0]).unwrap() - 0.1f64.powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn power_without_cutoff_rejected() {
        let g = g1(33);
        assert!(sample(&FunctionSpec::Power { exponent: 0.5, cutoff: 0.0 }, &g).is_err());
    }

    #[test]
    fn evaluate_nearest_and_ties() {
        let g = Grid::new(1, 1.0, 17).unwrap(); // spacing 1/8
        let f = SampledFunction::from_fn(g, |x| x[0]).unwrap();
        assert_eq!(f.evaluate(&[0.06]).unwrap(), 0.0);
        assert_eq!(f.evaluate(&[0.0625]).unwrap(), 0.0); // tie goes down
        assert_eq!(f.evaluate(&[0.07]).unwrap(), 0.125);
        assert!(f.evaluate(&[1.5]).is_err());
        let gauss = sample(&FunctionSpec::Gaussian { scale: 1.0 }, &g1(129)).unwrap();
        assert!((gauss.evaluate(&[1.0]).unwrap() - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn restriction_examples() {
        let g = g1(129);
        let one = SampledFunction::constant(g, 1.0).unwrap();
        assert_eq!(one.restrict(4.0).unwrap(), one);
        let c1 = sample(&FunctionSpec::centered_cube(1, 1.0), &g).unwrap();
        let c05 = sample(&FunctionSpec::centered_cube(1, 0.5), &g).unwrap();
        assert_eq!(c1.restrict(0.5).unwrap(), c05);
        let gauss = sample(&FunctionSpec::Gaussian { scale: 1.0 }, &g).unwrap();
        assert_eq!(gauss.restrict(1.0).unwrap().evaluate(&[2.0]).unwrap(), 0.0);
        assert!(one.restrict(0.0).is_err());
        assert!(one.restrict(4.5).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let g = g1(17);
        let mut v = vec![0.0; 17];
        v[3] = f64::NAN;
        assert!(SampledFunction::from_values(g, v).is_err());
    }

    #[test]
    fn combination_of_cubes() {
        let g = Grid::new(2, 2.0, 33).unwrap();
        let spec = FunctionSpec::Combination {
            terms: vec![
                WeightedSpec { weight: 1.0, spec: FunctionSpec::cube(&[0.5, 0.0], 0.25) },
                WeightedSpec { weight: -1.0, spec: FunctionSpec::cube(&[-0.5, 0.0], 0.25) },
            ],
        };
        let f = sample(&spec, &g).unwrap();
        assert!(f.values().iter().sum::<f64>().abs() < 1e-12);
        assert_eq!(f.evaluate(&[0.5, 0.0]).unwrap(), 1.0);
    }
}
