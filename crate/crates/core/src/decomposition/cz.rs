use super::whitney::{level_set, partition_of_unity, whitney_with, DyadicCube, Exterior};
use super::{monomial_exponents, monomial_values, node_weights, LocalFunction};
use crate::error::{Error, Result};
use crate::sampled::{Grid, SampledFunction};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Largest supported polynomial degree for moment corrections.
pub const MAX_DEGREE: usize = 3;
/// Gram matrices above this condition number trigger a degree reduction.
const MAX_CONDITION: f64 = 1e12;
/// Relative tolerance of the moment conditions, scaled by `||f||_inf |Q|`.
const MOMENT_TOL: f64 = 1e-8;

/// Weighted least-squares projector onto polynomials of a fixed degree,
/// using monomials centered at a cube and scaled by its side.
#[derive(Debug, Clone)]
pub(crate) struct Projector {
    exps: Vec<[u32; 3]>,
    center: [f64; 3],
    scale: f64,
    inverse: DMatrix<f64>,
}

impl Projector {
    /// Builds the projector for weight `eta` times the trapezoid weights,
    /// lowering the degree until the Gram matrix is well conditioned.
    /// Returns the projector, the degree used and the condition number.
    pub(crate) fn new(
        grid: &Grid,
        eta: &LocalFunction,
        weights: &[f64],
        center: [f64; 3],
        scale: f64,
        degree: usize,
    ) -> Result<(Self, usize, f64)> {
        let mut deg = degree;
        let mut buf = Vec::new();
        loop {
            let exps = monomial_exponents(grid.dim(), deg);
            let k = exps.len();
            let mut gram = DMatrix::<f64>::zeros(k, k);
            for (i, e) in eta.iter() {
                monomial_values(&exps, &grid.position(i), &center, scale, &mut buf);
                let w = e * weights[i];
                for a in 0..k {
                    for b in a..k {
                        gram[(a, b)] += w * buf[a] * buf[b];
                    }
                }
            }
            for a in 0..k {
                for b in 0..a {
                    gram[(a, b)] = gram[(b, a)];
                }
            }
            let svd = gram.clone().svd(true, true);
            let smax = svd.singular_values.max();
            let smin = svd.singular_values.min();
            let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
            if cond <= MAX_CONDITION || deg == 0 {
                if smax <= 0.0 {
                    return Err(Error::Numerical("moment system has no mass".into()));
                }
                let inverse = svd
                    .pseudo_inverse(smax * 1e-15)
                    .map_err(|e| Error::Numerical(format!("pseudo-inverse failed: {e}")))?;
                return Ok((Projector { exps, center, scale, inverse }, deg, cond));
            }
            deg -= 1;
        }
    }

    /// Coefficients of the projection of `g`, given at the nodes of `eta`.
    pub(crate) fn coefficients(
        &self,
        grid: &Grid,
        eta: &LocalFunction,
        weights: &[f64],
        g: impl Fn(usize) -> f64,
    ) -> Vec<f64> {
        let mut rhs = DVector::<f64>::zeros(self.exps.len());
        let mut buf = Vec::new();
        for (i, e) in eta.iter() {
            monomial_values(&self.exps, &grid.position(i), &self.center, self.scale, &mut buf);
            let w = e * weights[i] * g(i);
            for (r, q) in rhs.iter_mut().zip(&buf) {
                *r += w * q;
            }
        }
        (&self.inverse * rhs).iter().copied().collect()
    }

    pub(crate) fn eval(&self, coeffs: &[f64], x: &[f64; 3]) -> f64 {
        let mut buf = Vec::new();
        monomial_values(&self.exps, x, &self.center, self.scale, &mut buf);
        buf.iter().zip(coeffs).map(|(q, c)| q * c).sum()
    }
}

/// Largest `|<h, eta q>|` over centered monomials `q` of degree at most `degree`.
pub(crate) fn moment_residual(
    grid: &Grid,
    support: &LocalFunction,
    weights: &[f64],
    center: [f64; 3],
    scale: f64,
    degree: usize,
) -> f64 {
    let exps = monomial_exponents(grid.dim(), degree);
    let mut sums = vec![0.0; exps.len()];
    let mut buf = Vec::new();
    for (i, v) in support.iter() {
        monomial_values(&exps, &grid.position(i), &center, scale, &mut buf);
        for (s, q) in sums.iter_mut().zip(&buf) {
            *s += weights[i] * v * q;
        }
    }
    sums.into_iter().fold(0.0f64, |a, s| a.max(s.abs()))
}

/// One bad piece `b = (f - c) eta` of a Calderón–Zygmund decomposition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CzPiece {
    pub cube: DyadicCube,
    /// Degree actually used; lower than requested when the Gram matrix was ill conditioned.
    pub degree_used: usize,
    pub degree_reduced: bool,
    pub condition: f64,
    /// Coefficients of `c` in the monomials `((x - center) / side)^beta`, ordered by total degree.
    pub coefficients: Vec<f64>,
    pub bump: LocalFunction,
    pub piece: LocalFunction,
    /// Largest moment `|<f - c, eta q>|` over monomials up to the degree used.
    pub moment_residual: f64,
}

/// Calderón–Zygmund decomposition `f = g + sum_k b_k` at one level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CzDecomposition {
    pub level: i32,
    pub degree: usize,
    pub good: SampledFunction,
    pub pieces: Vec<CzPiece>,
    /// `||g||_inf / 2^level`.
    pub good_constant: f64,
    /// Moment tolerance `1e-8 ||f||_inf |Q|` evaluated for the largest cube.
    pub tolerance: f64,
    /// True when every piece meets its moment tolerance at the degree it used.
    pub moments_ok: bool,
    /// Pieces whose degree was lowered because their cube holds too few nodes.
    pub reduced_pieces: usize,
    #[serde(skip)]
    pub(crate) projectors: Vec<Projector>,
}

impl CzDecomposition {
    pub fn reconstruct(&self) -> SampledFunction {
        let mut v = self.good.values().to_vec();
        for p in &self.pieces {
            p.piece.add_into(&mut v, 1.0);
        }
        SampledFunction::from_raw(*self.good.grid(), v)
    }
}

/// Decomposes `f` over the Whitney cubes of `{mf > 2^j}`, with polynomial
/// corrections of degree `d` making each bad piece orthogonal to low-degree
/// polynomials against its bump. Points beyond the sampled window count as
/// outside the level set.
pub fn cz_decompose(f: &SampledFunction, j: i32, d: usize, mf: &SampledFunction) -> Result<CzDecomposition> {
    if d > MAX_DEGREE {
        return Err(Error::Unsupported(format!("moment degree {d} exceeds {MAX_DEGREE}")));
    }
    if !f.grid().same_as(mf.grid()) {
        return Err(Error::GridMismatch("maximal function lives on a different grid".into()));
    }
    let grid = *f.grid();
    let mask = level_set(mf, j);
    let fmax = f.max_abs();
    if mask.is_empty() {
        return Ok(CzDecomposition {
            level: j,
            degree: d,
            good: f.clone(),
            pieces: Vec::new(),
            good_constant: fmax / 2f64.powi(j),
            tolerance: 0.0,
            moments_ok: true,
            reduced_pieces: 0,
            projectors: Vec::new(),
        });
    }
    let wd = whitney_with(&mask, Exterior::Complement)?;
    let etas = partition_of_unity(&wd);
    let weights = node_weights(&grid);
    let fv = f.values();
    let built: Vec<(CzPiece, Projector)> = wd
        .cubes
        .par_iter()
        .zip(etas.into_par_iter())
        .map(|(cube, eta)| {
            let center = cube.center();
            let side = cube.side();
            let (proj, used, cond) = Projector::new(&grid, &eta, &weights, center, side, d)?;
            let coeffs = proj.coefficients(&grid, &eta, &weights, |i| fv[i]);
            let piece = LocalFunction::from_pairs(
                eta.iter().map(|(i, e)| (i, (fv[i] - proj.eval(&coeffs, &grid.position(i))) * e)).collect(),
            );
            // The piece is (f - c) eta, so its plain moments are the orthogonality residuals.
            let residual = moment_residual(&grid, &piece, &weights, center, side, used);
            Ok((
                CzPiece {
                    cube: cube.clone(),
                    degree_used: used,
                    degree_reduced: used < d,
                    condition: cond,
                    coefficients: coeffs,
                    bump: eta,
                    piece,
                    moment_residual: residual,
                },
                proj,
            ))
        })
        .collect::<Result<_>>()?;
    let (pieces, projectors): (Vec<CzPiece>, Vec<Projector>) = built.into_iter().unzip();
    let reduced_pieces = pieces.iter().filter(|p| p.degree_reduced).count();
    let mut good = fv.to_vec();
    for p in &pieces {
        p.piece.add_into(&mut good, -1.0);
    }
    let good = SampledFunction::from_raw(grid, good);
    let moments_ok = pieces.iter().all(|p| p.moment_residual <= MOMENT_TOL * fmax * p.cube.volume());
    let tolerance = pieces.iter().map(|p| MOMENT_TOL * fmax * p.cube.volume()).fold(0.0, f64::max);
    Ok(CzDecomposition {
        level: j,
        degree: d,
        good_constant: good.max_abs() / 2f64.powi(j),
        good,
        pieces,
        tolerance,
        moments_ok,
        reduced_pieces,
        projectors,
    })
}
