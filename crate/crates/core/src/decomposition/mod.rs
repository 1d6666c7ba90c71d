//! Whitney, Calderón–Zygmund and atomic decompositions, and block construction.

mod atomic;
mod blocks;
mod cz;
mod whitney;

pub use atomic::{atomic_decompose, atomic_synthesize, synthesize_atoms, Atom, AtomCube, AtomicDecomposition};
pub use blocks::{
    eq12_weight_check, lemma61_surrogate, make_block, norming_block, pairing, Block, BlockSum, Eq12Report,
    Lemma61Report,
};
pub use cz::{cz_decompose, CzDecomposition, CzPiece, MAX_DEGREE};
pub use whitney::{
    level_set, partition_of_unity, whitney, whitney_with, DyadicCube, Exterior, NodeMask, WhitneyCheck,
    WhitneyDecomposition,
};

use crate::sampled::{Grid, SampledFunction};
use serde::{Deserialize, Serialize};

/// Sparse function on a grid: values at a sorted list of node indices, zero elsewhere.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LocalFunction {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl LocalFunction {
    /// Builds from index/value pairs; indices are sorted and must be distinct.
    pub fn from_pairs(mut pairs: Vec<(usize, f64)>) -> Self {
        pairs.sort_by_key(|p| p.0);
        let (indices, values) = pairs.into_iter().unzip();
        LocalFunction { indices, values }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.indices.binary_search(&idx).map(|k| self.values[k]).unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        LocalFunction { indices: self.indices.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Adds `c * self` into a dense value array.
    pub fn add_into(&self, dense: &mut [f64], c: f64) {
        for (i, v) in self.iter() {
            dense[i] += c * v;
        }
    }

    pub fn to_sampled(&self, grid: Grid) -> SampledFunction {
        let mut dense = vec![0.0; grid.len()];
        self.add_into(&mut dense, 1.0);
        SampledFunction::from_raw(grid, dense)
    }
}

/// Per-node trapezoid weights of the full grid.
pub(crate) fn node_weights(grid: &Grid) -> Vec<f64> {
    let w = crate::mixed_lebesgue::RegionWeights::full(grid);
    (0..grid.len()).map(|i| w.node_measure(grid, i)).collect()
}

/// Exponent tuples of all monomials in `dim` variables with total degree at most `degree`,
/// ordered by total degree.
pub(crate) fn monomial_exponents(dim: usize, degree: usize) -> Vec<[u32; 3]> {
    let mut out = Vec::new();
    for total in 0..=degree as u32 {
        for a in 0..=total {
            if dim == 1 {
                if a == total {
                    out.push([a, 0, 0]);
                }
                continue;
            }
            for b in 0..=(total - a) {
                let c = total - a - b;
                if dim == 2 && c != 0 {
                    continue;
                }
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// Values of the centered, side-scaled monomials `((x - center) / scale)^beta` at a point.
pub(crate) fn monomial_values(exps: &[[u32; 3]], x: &[f64; 3], center: &[f64; 3], scale: f64, out: &mut Vec<f64>) {
    out.clear();
    let u = [(x[0] - center[0]) / scale, (x[1] - center[1]) / scale, (x[2] - center[2]) / scale];
    for e in exps {
        out.push(u[0].powi(e[0] as i32) * u[1].powi(e[1] as i32) * u[2].powi(e[2] as i32));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_counts() {
        assert_eq!(monomial_exponents(1, 3).len(), 4);
        assert_eq!(monomial_exponents(2, 2).len(), 6);
        assert_eq!(monomial_exponents(3, 2).len(), 10);
        assert_eq!(monomial_exponents(3, 0), vec![[0, 0, 0]]);
    }

    #[test]
    fn local_function_roundtrip() {
        let g = Grid::new(1, 1.0, 17).unwrap();
        let l = LocalFunction::from_pairs(vec![(5, 2.0), (1, -1.0)]);
        assert_eq!(l.indices(), &[1, 5]);
        assert_eq!(l.get(5), 2.0);
        assert_eq!(l.get(4), 0.0);
        let s = l.to_sampled(g);
        assert_eq!(s.values()[1], -1.0);
        assert_eq!(l.max_abs(), 2.0);
    }
}
