use super::cz::{cz_decompose, moment_residual, CzDecomposition};
use super::whitney::DyadicCube;
use super::{node_weights, LocalFunction};
use crate::error::{Error, Result};
use crate::operators::hl_maximal;
use crate::sampled::{Grid, SampledFunction};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

/// Closed cube `|x_i - center_i| <= half_side` carrying an atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomCube {
    pub center: Vec<f64>,
    pub half_side: f64,
}

impl AtomCube {
    pub fn contains(&self, point: &[f64]) -> bool {
        self.center.iter().zip(point).all(|(c, x)| (x - c).abs() <= self.half_side * (1.0 + 1e-12))
    }

    pub fn volume(&self) -> f64 {
        (2.0 * self.half_side).powi(self.center.len() as i32)
    }
}

/// `lambda * a` with `|a| <= 1` on `cube` and zero off it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Atom {
    pub level: i32,
    pub lambda: f64,
    pub cube: AtomCube,
    /// Whitney cube the atom was built from, when it came from a decomposition.
    pub whitney_cube: Option<DyadicCube>,
    pub a: LocalFunction,
    /// Moment degree the atom actually satisfies; below the requested degree
    /// when a contributing piece lives on a cube with too few nodes.
    pub degree: usize,
    /// Largest `|integral a q|` over centered monomials `q` of degree at most `degree`.
    pub moment_residual: f64,
}

/// Atoms of `f` over a finite range of levels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AtomicDecomposition {
    pub grid: Grid,
    pub degree: usize,
    pub j_min: i32,
    pub j_max: i32,
    /// Measured `max |A_{j,k}| / 2^j`.
    pub c0: f64,
    pub atoms: Vec<Atom>,
    /// `||f - sum lambda a||_inf`.
    pub residual: f64,
    /// `||sum lambda a - (g_{j_max+1} - g_{j_min})||_inf`.
    pub telescoping_error: f64,
    /// Largest `||g_j||_inf / 2^j` over the levels used.
    pub good_constant: f64,
    pub degree_reduced: bool,
}

/// Contributions `-T_{k,l}` of one next-level piece to the current-level pieces it meets.
fn corrections(
    grid: &Grid,
    f: &[f64],
    weights: &[f64],
    cur: &CzDecomposition,
    cover: &[Vec<usize>],
    next: &CzDecomposition,
    l: usize,
) -> Vec<(usize, Vec<(usize, f64)>)> {
    let piece = &next.pieces[l];
    let proj = &next.projectors[l];
    let eta_l = &piece.bump;
    let c_l: Vec<f64> = eta_l.iter().map(|(i, _)| proj.eval(&piece.coefficients, &grid.position(i))).collect();
    let ks: BTreeSet<usize> = eta_l.indices().iter().flat_map(|i| cover[*i].iter().copied()).collect();
    ks.into_iter()
        .map(|k| {
            let eta_k = &cur.pieces[k].bump;
            let local: HashMap<usize, f64> =
                eta_l.indices().iter().zip(&c_l).map(|(i, c)| (*i, (f[*i] - c) * eta_k.get(*i))).collect();
            let p = proj.coefficients(grid, eta_l, weights, |i| local[&i]);
            let t = eta_l
                .iter()
                .map(|(i, e)| (i, -e * (local[&i] - proj.eval(&p, &grid.position(i)))))
                .collect();
            (k, t)
        })
        .collect()
}

/// Localized differences `A_{j,k}` with `sum_k A_{j,k} = g_{j+1} - g_j` and
/// vanishing moments, each with the degree its moments vanish to.
fn level_pieces(
    grid: &Grid,
    f: &[f64],
    weights: &[f64],
    cur: &CzDecomposition,
    next: &CzDecomposition,
) -> Vec<(LocalFunction, usize)> {
    let mut cover: Vec<Vec<usize>> = vec![Vec::new(); grid.len()];
    for (k, p) in cur.pieces.iter().enumerate() {
        for i in p.bump.indices() {
            cover[*i].push(k);
        }
    }
    let mut acc: Vec<HashMap<usize, f64>> =
        cur.pieces.iter().map(|p| p.piece.iter().collect::<HashMap<_, _>>()).collect();
    let all: Vec<Vec<(usize, Vec<(usize, f64)>)>> = (0..next.pieces.len())
        .into_par_iter()
        .map(|l| corrections(grid, f, weights, cur, &cover, next, l))
        .collect();
    let mut degree: Vec<usize> = cur.pieces.iter().map(|p| p.degree_used).collect();
    for (l, per_l) in all.into_iter().enumerate() {
        for (k, t) in per_l {
            degree[k] = degree[k].min(next.pieces[l].degree_used);
            for (i, v) in t {
                *acc[k].entry(i).or_insert(0.0) += v;
            }
        }
    }
    acc.into_iter().zip(degree).map(|(m, d)| (LocalFunction::from_pairs(m.into_iter().collect()), d)).collect()
}

/// Atomic decomposition of `f` over levels `j_min..=j_max`, using the
/// Hardy–Littlewood maximal function to select the level sets.
pub fn atomic_decompose(f: &SampledFunction, d: usize, j_min: i32, j_max: i32) -> Result<AtomicDecomposition> {
    if j_min > j_max {
        return Err(Error::param(format!("empty level range {j_min}..={j_max}")));
    }
    let grid = *f.grid();
    let mf = hl_maximal(f);
    let czs: Vec<CzDecomposition> =
        (j_min..=j_max + 1).into_par_iter().map(|j| cz_decompose(f, j, d, &mf)).collect::<Result<_>>()?;
    let weights = node_weights(&grid);
    let fv = f.values();
    // Pieces at roundoff level carry no information and would dominate after normalization.
    let floor = 1e-12 * f.max_abs();
    let mut raw: Vec<(i32, DyadicCube, LocalFunction, usize)> = Vec::new();
    for w in czs.windows(2) {
        let (cur, next) = (&w[0], &w[1]);
        for (p, (a, deg)) in cur.pieces.iter().zip(level_pieces(&grid, fv, &weights, cur, next)) {
            if a.max_abs() > floor {
                raw.push((cur.level, p.cube.clone(), a, deg));
            }
        }
    }
    let c0 = raw.iter().map(|(j, _, a, _)| a.max_abs() / 2f64.powi(*j)).fold(0.0, f64::max);
    let dim = grid.dim();
    let atoms: Vec<Atom> = raw
        .into_iter()
        .map(|(j, cube, a, deg)| {
            let center = cube.center();
            let mut half = 9.0 * cube.side() / 16.0;
            for i in a.indices() {
                let p = grid.position(*i);
                for ax in 0..dim {
                    half = half.max((p[ax] - center[ax]).abs());
                }
            }
            let lambda = c0 * 2f64.powi(j);
            let a = a.scaled(1.0 / lambda);
            let moment = moment_residual(&grid, &a, &weights, center, 2.0 * half, deg);
            Atom {
                level: j,
                lambda,
                cube: AtomCube { center: center[..dim].to_vec(), half_side: half },
                whitney_cube: Some(cube),
                a,
                degree: deg,
                moment_residual: moment,
            }
        })
        .collect();
    let synth = synthesize_atoms(grid, &atoms)?;
    let residual = f.sub(&synth)?.max_abs();
    let first = &czs[0].good;
    let last = &czs[czs.len() - 1].good;
    let telescoping_error = last.sub(first)?.sub(&synth)?.max_abs();
    Ok(AtomicDecomposition {
        grid,
        degree: d,
        j_min,
        j_max,
        c0,
        atoms,
        residual,
        telescoping_error,
        good_constant: czs.iter().map(|c| c.good_constant).fold(0.0, f64::max),
        degree_reduced: czs.iter().any(|c| c.pieces.iter().any(|p| p.degree_reduced)),
    })
}

/// `sum_j lambda_j a_j` on the decomposition's grid.
pub fn atomic_synthesize(dec: &AtomicDecomposition) -> SampledFunction {
    let mut v = vec![0.0; dec.grid.len()];
    for atom in &dec.atoms {
        atom.a.add_into(&mut v, atom.lambda);
    }
    SampledFunction::from_raw(dec.grid, v)
}

/// `sum_j lambda_j a_j` for an explicit atom list.
pub fn synthesize_atoms(grid: Grid, atoms: &[Atom]) -> Result<SampledFunction> {
    let mut v = vec![0.0; grid.len()];
    for atom in atoms {
        if atom.a.indices().last().is_some_and(|i| *i >= grid.len()) {
            return Err(Error::GridMismatch("atom refers to nodes outside the grid".into()));
        }
        atom.a.add_into(&mut v, atom.lambda);
    }
    Ok(SampledFunction::from_raw(grid, v))
}
