use crate::error::{Error, Result};
use crate::sampled::{Grid, SampledFunction};
use rayon::prelude::*;

/// Summed-area table of `|f|` with one leading zero layer per axis.
struct PrefixTable {
    dim: usize,
    m: usize,
    stride: [usize; 3],
    data: Vec<f64>,
}

impl PrefixTable {
    fn new(grid: &Grid, values: &[f64]) -> Self {
        let dim = grid.dim();
        let m = grid.points();
        let side = m + 1;
        let stride = [1, side, side * side];
        let mut data = vec![0.0; side.pow(dim as u32)];
        for (idx, v) in values.iter().enumerate() {
            let ix = grid.unravel(idx);
            let mut pos = 0;
            for a in 0..dim {
                pos += (ix[a] + 1) * stride[a];
            }
            data[pos] = v.abs();
        }
        for a in 0..dim {
            for pos in 0..data.len() {
                let coord = (pos / stride[a]) % side;
                if coord > 0 {
                    data[pos] += data[pos - stride[a]];
                }
            }
        }
        PrefixTable { dim, m, stride, data }
    }

    /// Sum over the clipped box `lo[a] <= i_a < hi[a]` by inclusion-exclusion.
    fn box_sum(&self, lo: &[usize; 3], hi: &[usize; 3]) -> f64 {
        let mut total = 0.0;
        for corner in 0..(1usize << self.dim) {
            let mut pos = 0;
            let mut sign = 1.0;
            for a in 0..self.dim {
                if corner & (1 << a) != 0 {
                    pos += lo[a] * self.stride[a];
                    sign = -sign;
                } else {
                    pos += hi[a] * self.stride[a];
                }
            }
            total += sign * self.data[pos];
        }
        total
    }

    fn total(&self) -> f64 {
        self.box_sum(&[0; 3], &[self.m; 3])
    }
}

/// Centered Hardy–Littlewood maximal function over the discrete window set.
///
/// For each node the window of half side `k * spacing`, `k = 0..=points`, covers
/// `(2k+1)^n` node cells; nodes outside the grid count as zeros. The value is
/// the largest window average of `|f|`.
pub fn hl_maximal(f: &SampledFunction) -> SampledFunction {
    let grid = *f.grid();
    let table = PrefixTable::new(&grid, f.values());
    let total = table.total();
    let dim = grid.dim();
    let m = grid.points();
    let out: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let ix = grid.unravel(idx);
            let mut best = 0.0f64;
            for k in 0..=m {
                let count = ((2 * k + 1) as f64).powi(dim as i32);
                if total / count <= best {
                    break;
                }
                let mut lo = [0usize; 3];
                let mut hi = [0usize; 3];
                for a in 0..dim {
                    lo[a] = ix[a].saturating_sub(k);
                    hi[a] = (ix[a] + k + 1).min(m);
                }
                best = best.max(table.box_sum(&lo, &hi) / count);
            }
            best
        })
        .collect();
    SampledFunction::from_raw(grid, out)
}

/// Pointwise `l^u` combination of nonnegative node arrays, scaled by the max to avoid overflow.
fn lu_combine(arrays: &[Vec<f64>], u: f64) -> Vec<f64> {
    let len = arrays[0].len();
    (0..len)
        .map(|i| {
            let scale = arrays.iter().fold(0.0f64, |acc, a| acc.max(a[i]));
            if u.is_infinite() || scale == 0.0 {
                scale
            } else {
                scale * arrays.iter().map(|a| (a[i] / scale).powf(u)).sum::<f64>().powf(1.0 / u)
            }
        })
        .collect()
}

fn check_family(fs: &[SampledFunction], u: f64) -> Result<Grid> {
    let first = fs.first().ok_or_else(|| Error::param("function list is empty"))?;
    if u.is_nan() || u < 1.0 {
        return Err(Error::param(format!("aggregation exponent must lie in [1, inf], got {u}")));
    }
    let grid = *first.grid();
    if fs.iter().any(|f| !f.grid().same_as(&grid)) {
        return Err(Error::GridMismatch("all functions must share one grid".into()));
    }
    Ok(grid)
}

/// Pointwise `(sum_j |f_j|^u)^(1/u)`, or the pointwise max when `u` is infinite.
pub fn lu_aggregate(fs: &[SampledFunction], u: f64) -> Result<SampledFunction> {
    let grid = check_family(fs, u)?;
    let abs: Vec<Vec<f64>> = fs.iter().map(|f| f.abs().into_values()).collect();
    Ok(SampledFunction::from_raw(grid, lu_combine(&abs, u)))
}

/// Pointwise `l^u` aggregation of the maximal functions of each entry.
pub fn vector_maximal(fs: &[SampledFunction], u: f64) -> Result<SampledFunction> {
    let grid = check_family(fs, u)?;
    let maxes: Vec<Vec<f64>> = fs.par_iter().map(|f| hl_maximal(f).into_values()).collect();
    Ok(SampledFunction::from_raw(grid, lu_combine(&maxes, u)))
}
