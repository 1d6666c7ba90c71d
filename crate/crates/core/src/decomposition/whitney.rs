use super::LocalFunction;
use crate::error::{Error, Result};
use crate::sampled::{Grid, SampledFunction};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

/// Boolean selection of grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMask {
    grid: Grid,
    inside: Vec<bool>,
}

impl NodeMask {
    pub fn new(grid: Grid, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.len() {
            return Err(Error::GridMismatch(format!("mask has {} entries, grid has {}", inside.len(), grid.len())));
        }
        Ok(NodeMask { grid, inside })
    }

    /// Nodes where `pred(position)` holds.
    pub fn from_fn(grid: Grid, pred: impl Fn(&[f64]) -> bool) -> Self {
        let inside = (0..grid.len()).map(|i| pred(&grid.position(i)[..grid.dim()])).collect();
        NodeMask { grid, inside }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.inside
    }

    pub fn count(&self) -> usize {
        self.inside.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.inside.iter().any(|b| *b)
    }

    pub fn is_full(&self) -> bool {
        self.inside.iter().all(|b| *b)
    }

    /// True when every node of `self` is also in `other`.
    pub fn is_subset_of(&self, other: &NodeMask) -> bool {
        self.inside.iter().zip(&other.inside).all(|(a, b)| !*a || *b)
    }

    pub fn indicator(&self) -> SampledFunction {
        SampledFunction::from_raw(self.grid, self.inside.iter().map(|b| if *b { 1.0 } else { 0.0 }).collect())
    }
}

/// Nodes where `mf > 2^j`.
pub fn level_set(mf: &SampledFunction, j: i32) -> NodeMask {
    let t = 2f64.powi(j);
    NodeMask { grid: *mf.grid(), inside: mf.values().iter().map(|v| *v > t).collect() }
}

/// Dyadic cube `prod_i [c_i 2^-level, (c_i + 1) 2^-level)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub level: i32,
    pub coords: Vec<i64>,
}

impl DyadicCube {
    pub fn side(&self) -> f64 {
        2f64.powi(-self.level)
    }

    pub fn diameter(&self) -> f64 {
        self.side() * (self.coords.len() as f64).sqrt()
    }

    pub fn center(&self) -> [f64; 3] {
        let s = self.side();
        let mut c = [0.0; 3];
        for (a, k) in self.coords.iter().enumerate() {
            c[a] = (*k as f64 + 0.5) * s;
        }
        c
    }

    pub fn volume(&self) -> f64 {
        self.side().powi(self.coords.len() as i32)
    }

    /// Cube at `level` whose half-open box holds the point.
    pub fn containing(point: &[f64], level: i32) -> Self {
        let s = 2f64.powi(-level);
        DyadicCube { level, coords: point.iter().map(|x| (x / s).floor() as i64).collect() }
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        let s = self.side();
        self.coords.iter().zip(point).all(|(c, x)| (x / s).floor() as i64 == *c)
    }
}

/// What lies outside the sampled window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exterior {
    /// Only unmasked grid nodes form the complement.
    Ignore,
    /// The region `|x_i| >= R + spacing` on any axis also belongs to the complement.
    Complement,
}

/// Disjoint dyadic cubes covering the masked nodes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitneyDecomposition {
    pub mask: NodeMask,
    pub exterior: Exterior,
    pub cubes: Vec<DyadicCube>,
    /// `dist(Q, complement) / diam(Q)` per cube.
    pub dist_ratio: Vec<f64>,
    /// Masked node indices per cube.
    pub members: Vec<Vec<usize>>,
}

/// Result of an independent check of the Whitney invariants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhitneyCheck {
    pub disjoint: bool,
    pub covers_mask: bool,
    pub bracket_ok: bool,
    pub max_overlap: usize,
    pub overlap_bound: usize,
}

impl WhitneyCheck {
    pub fn all_ok(&self) -> bool {
        self.disjoint && self.covers_mask && self.bracket_ok && self.max_overlap <= self.overlap_bound
    }
}

/// Squared one-dimensional distance transform (lower envelope of parabolas).
fn dt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![f64::INFINITY; n];
    let mut v: Vec<usize> = Vec::with_capacity(n);
    let mut z: Vec<f64> = Vec::with_capacity(n + 1);
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.clear();
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
                    if s <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    if v.is_empty() {
        return out;
    }
    z.push(f64::INFINITY);
    let mut k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        *o = (q as f64 - p as f64).powi(2) + f[p];
    }
    out
}

/// Euclidean distance from every node to the nearest unmasked node.
fn distance_to_complement(mask: &NodeMask) -> Vec<f64> {
    let grid = mask.grid;
    let m = grid.points();
    let mut d: Vec<f64> = mask.inside.iter().map(|b| if *b { f64::INFINITY } else { 0.0 }).collect();
    for axis in 0..grid.dim() {
        let stride = m.pow(axis as u32);
        let mut next = d.clone();
        for idx in 0..grid.len() {
            if (idx / stride) % m != 0 {
                continue;
            }
            let line: Vec<f64> = (0..m).map(|i| d[idx + i * stride]).collect();
            for (i, v) in dt_1d(&line).into_iter().enumerate() {
                next[idx + i * stride] = v;
            }
        }
        d = next;
    }
    let h = grid.spacing();
    d.into_iter().map(|v| v.sqrt() * h).collect()
}

fn exterior_distance(grid: &Grid, idx: usize) -> f64 {
    let ix = grid.unravel(idx);
    let m = grid.points();
    (0..grid.dim()).map(|a| (ix[a] + 1).min(m - ix[a]) as f64 * grid.spacing()).fold(f64::INFINITY, f64::min)
}

/// Distance from the closed box of `cube` to the complement, searched within `reach`.
fn cube_distance(mask: &NodeMask, exterior: Exterior, cube: &DyadicCube, reach: f64) -> f64 {
    let grid = mask.grid;
    let dim = grid.dim();
    let s = cube.side();
    let h = grid.spacing();
    let ci = grid.center_index() as f64;
    let m = grid.points();
    let mut lo = [0.0; 3];
    let mut hi = [0.0; 3];
    let mut ilo = [0usize; 3];
    let mut ihi = [0usize; 3];
    let mut best = f64::INFINITY;
    for a in 0..dim {
        lo[a] = cube.coords[a] as f64 * s;
        hi[a] = lo[a] + s;
        let a_lo = ((lo[a] - reach) / h + ci).ceil().max(0.0);
        let a_hi = ((hi[a] + reach) / h + ci).floor().min((m - 1) as f64);
        if a_lo > a_hi {
            ilo[a] = 1;
            ihi[a] = 0;
        } else {
            ilo[a] = a_lo as usize;
            ihi[a] = a_hi as usize;
        }
        if exterior == Exterior::Complement {
            let edge = grid.half_width() + h;
            best = best.min((edge - hi[a]).max(0.0)).min((lo[a] + edge).max(0.0));
        }
    }
    if (0..dim).any(|a| ilo[a] > ihi[a]) {
        return best;
    }
    let mut ix = ilo;
    loop {
        let idx = grid.ravel(&ix[..dim]);
        if !mask.inside[idx] {
            let mut d2 = 0.0;
            for a in 0..dim {
                let x = grid.coord(ix[a]);
                let g = if x < lo[a] { lo[a] - x } else if x > hi[a] { x - hi[a] } else { 0.0 };
                d2 += g * g;
            }
            best = best.min(d2.sqrt());
        }
        let mut a = 0;
        loop {
            if a == dim {
                return best;
            }
            if ix[a] < ihi[a] {
                ix[a] += 1;
                break;
            }
            ix[a] = ilo[a];
            a += 1;
        }
    }
}

/// Whitney decomposition with the unmasked grid nodes as the complement.
pub fn whitney(mask: &NodeMask) -> Result<WhitneyDecomposition> {
    whitney_with(mask, Exterior::Ignore)
}

/// Whitney decomposition of the masked nodes: each masked node is assigned the
/// largest dyadic cube containing it with `diam <= dist(Q, complement) <= 4 diam`.
/// Maximality makes the selected cubes pairwise disjoint.
pub fn whitney_with(mask: &NodeMask, exterior: Exterior) -> Result<WhitneyDecomposition> {
    let grid = mask.grid;
    if exterior == Exterior::Ignore && mask.is_full() {
        return Err(Error::param("mask covers the whole grid, so it has no complement"));
    }
    let dim = grid.dim();
    let sqrt_n = (dim as f64).sqrt();
    let mut dist = distance_to_complement(mask);
    if exterior == Exterior::Complement {
        for (i, d) in dist.iter_mut().enumerate() {
            *d = d.min(exterior_distance(&grid, i));
        }
    }
    let masked: Vec<usize> = (0..grid.len()).filter(|&i| mask.inside[i]).collect();
    // Candidate levels have diameter D in [d/5, d]; a dyadic level always lands in [d/4, d/2].
    let candidates: Vec<Vec<DyadicCube>> = masked
        .par_iter()
        .map(|&i| {
            let d = dist[i];
            let top = (-(d / sqrt_n).log2()).ceil() as i32;
            let bottom = (-(d / (5.0 * sqrt_n)).log2()).floor() as i32;
            let p = grid.position(i);
            (top..=bottom).map(|l| DyadicCube::containing(&p[..dim], l)).collect()
        })
        .collect();
    let unique: Vec<DyadicCube> =
        candidates.iter().flatten().cloned().collect::<HashSet<_>>().into_iter().collect();
    let measured: HashMap<DyadicCube, f64> = unique
        .into_par_iter()
        .map(|c| {
            let d = cube_distance(mask, exterior, &c, 4.0 * c.diameter() * (1.0 + 1e-9));
            (c, d)
        })
        .collect();
    let tol = 1e-12;
    let mut chosen: BTreeMap<DyadicCube, Vec<usize>> = BTreeMap::new();
    for (&i, cands) in masked.iter().zip(&candidates) {
        let pick = cands.iter().find(|c| {
            let d = measured[*c];
            let diam = c.diameter();
            d >= diam * (1.0 - tol) && d <= 4.0 * diam * (1.0 + tol)
        });
        let cube = pick.ok_or_else(|| Error::Numerical(format!("no Whitney cube fits node {i}")))?;
        chosen.entry(cube.clone()).or_default().push(i);
    }
    let mut cubes = Vec::with_capacity(chosen.len());
    let mut dist_ratio = Vec::with_capacity(chosen.len());
    let mut members = Vec::with_capacity(chosen.len());
    for (c, nodes) in chosen {
        dist_ratio.push(measured[&c] / c.diameter());
        cubes.push(c);
        members.push(nodes);
    }
    Ok(WhitneyDecomposition { mask: mask.clone(), exterior, cubes, dist_ratio, members })
}

fn dilated_range(grid: &Grid, center: f64, half: f64) -> Option<(usize, usize)> {
    let h = grid.spacing();
    let ci = grid.center_index() as f64;
    let lo = ((center - half) / h + ci).ceil().max(0.0);
    let hi = ((center + half) / h + ci).floor().min((grid.points() - 1) as f64);
    (lo <= hi).then_some((lo as usize, hi as usize))
}

/// Calls `visit(idx, position)` for each node in the open box `|x_i - c_i| < half`.
fn for_each_in_box(grid: &Grid, center: &[f64; 3], half: f64, mut visit: impl FnMut(usize, [f64; 3])) {
    let dim = grid.dim();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..dim {
        match dilated_range(grid, center[a], half) {
            Some((l, h)) => {
                lo[a] = l;
                hi[a] = h;
            }
            None => return,
        }
    }
    let mut ix = lo;
    loop {
        let idx = grid.ravel(&ix[..dim]);
        let p = grid.position(idx);
        if (0..dim).all(|a| (p[a] - center[a]).abs() < half) {
            visit(idx, p);
        }
        let mut a = 0;
        loop {
            if a == dim {
                return;
            }
            if ix[a] < hi[a] {
                ix[a] += 1;
                break;
            }
            ix[a] = lo[a];
            a += 1;
        }
    }
}

impl WhitneyDecomposition {
    /// Checks disjointness, exact cover, the distance bracket and the overlap of the dilates.
    pub fn check(&self) -> WhitneyCheck {
        let grid = self.mask.grid;
        let dim = grid.dim();
        let mut owner = vec![usize::MAX; grid.len()];
        let mut disjoint = true;
        for (k, cube) in self.cubes.iter().enumerate() {
            for i in 0..grid.len() {
                if cube.contains(&grid.position(i)[..dim]) {
                    if owner[i] != usize::MAX {
                        disjoint = false;
                    }
                    owner[i] = k;
                }
            }
        }
        let covers_mask = (0..grid.len()).all(|i| self.mask.inside[i] == (owner[i] != usize::MAX));
        let bracket_ok = self.cubes.iter().all(|c| {
            let d = cube_distance(&self.mask, self.exterior, c, f64::INFINITY);
            d >= c.diameter() * (1.0 - 1e-12) && d <= 4.0 * c.diameter() * (1.0 + 1e-12)
        });
        let mut count = vec![0usize; grid.len()];
        for c in &self.cubes {
            for_each_in_box(&grid, &c.center(), 9.0 * c.side() / 16.0, |i, _| count[i] += 1);
        }
        WhitneyCheck {
            disjoint,
            covers_mask,
            bracket_ok,
            max_overlap: count.into_iter().max().unwrap_or(0),
            overlap_bound: 12usize.pow(dim as u32),
        }
    }
}

/// Tensor `cos^2` bump on the dilate `(9/8) Q`, positive on the open dilate.
fn raw_bump(grid: &Grid, cube: &DyadicCube) -> Vec<(usize, f64)> {
    let half = 9.0 * cube.side() / 16.0;
    let c = cube.center();
    let dim = grid.dim();
    let mut out = Vec::new();
    for_each_in_box(grid, &c, half, |i, p| {
        let v: f64 = (0..dim).map(|a| (std::f64::consts::FRAC_PI_2 * (p[a] - c[a]) / half).cos().powi(2)).product();
        out.push((i, v));
    });
    out
}

/// Smooth partition of unity subordinate to the dilated cubes: bumps are divided
/// by their pointwise sum on the mask and set to zero off the mask, so
/// `sum_k eta_k` equals the mask indicator.
pub fn partition_of_unity(wd: &WhitneyDecomposition) -> Vec<LocalFunction> {
    let grid = wd.mask.grid;
    let raws: Vec<Vec<(usize, f64)>> = wd.cubes.par_iter().map(|c| raw_bump(&grid, c)).collect();
    let mut total = vec![0.0; grid.len()];
    for raw in &raws {
        for (i, v) in raw {
            total[*i] += v;
        }
    }
    raws.into_par_iter()
        .map(|raw| {
            LocalFunction::from_pairs(
                raw.into_iter()
                    .filter(|(i, _)| wd.mask.inside[*i] && total[*i] > 0.0)
                    .map(|(i, v)| (i, v / total[i]))
                    .collect(),
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_distance(mask: &NodeMask) -> Vec<f64> {
        let g = mask.grid;
        (0..g.len())
            .map(|i| {
                let p = g.position(i);
                (0..g.len())
                    .filter(|j| !mask.inside[*j])
                    .map(|j| {
                        let q = g.position(j);
                        ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    #[test]
    fn distance_transform_matches_brute_force() {
        let g = Grid::new(2, 2.0, 17).unwrap();
        let mask = NodeMask::from_fn(g, |x| x[0] * x[0] + 0.5 * x[1] * x[1] < 1.7 || x[0] > 1.2);
        let fast = distance_to_complement(&mask);
        for (a, b) in fast.iter().zip(brute_distance(&mask)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn level_set_threshold() {
        let g = Grid::new(1, 1.0, 17).unwrap();
        let one = SampledFunction::constant(g, 1.0).unwrap();
        assert!(level_set(&one, -1).is_full());
        assert!(level_set(&one, 0).is_empty());
        assert!(level_set(&SampledFunction::zeros(g), -30).is_empty());
    }

    #[test]
    fn interval_mask_1d() {
        let g = Grid::new(1, 2.0, 129).unwrap();
        let mask = NodeMask::from_fn(g, |x| x[0] > 0.0 && x[0] < 1.0);
        let wd = whitney(&mask).unwrap();
        assert!(!wd.cubes.is_empty());
        assert!(wd.check().all_ok(), "{:?}", wd.check());
    }

    #[test]
    fn small_neighborhood_2d() {
        let g = Grid::new(2, 2.0, 33).unwrap();
        let h = g.spacing();
        let mask = NodeMask::from_fn(g, |x| x[0].abs() <= h * 1.01 && x[1].abs() <= h * 1.01);
        let wd = whitney(&mask).unwrap();
        assert!(wd.cubes.len() <= 9);
        assert!(wd.check().all_ok());
    }

    #[test]
    fn full_mask_needs_exterior() {
        let g = Grid::new(1, 1.0, 17).unwrap();
        let mask = NodeMask::from_fn(g, |_| true);
        assert!(whitney(&mask).is_err());
        let wd = whitney_with(&mask, Exterior::Complement).unwrap();
        assert!(wd.check().all_ok());
    }

    #[test]
    fn partition_sums_to_mask() {
        let g = Grid::new(2, 2.0, 33).unwrap();
        let mask = NodeMask::from_fn(g, |x| x[0] * x[0] + x[1] * x[1] < 1.0);
        let wd = whitney(&mask).unwrap();
        let etas = partition_of_unity(&wd);
        let mut sum = vec![0.0; g.len()];
        for e in &etas {
            assert!(e.values().iter().all(|v| (0.0..=1.0 + 1e-15).contains(v)));
            e.add_into(&mut sum, 1.0);
        }
        for i in 0..g.len() {
            let want = if mask.contains(i) { 1.0 } else { 0.0 };
            assert!((sum[i] - want).abs() < 1e-12);
        }
    }
}
