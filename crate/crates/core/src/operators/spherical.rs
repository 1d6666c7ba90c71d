use crate::sampled::{Grid, SampledFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Default number of rotations in two and three dimensions.
pub const DEFAULT_ROTATIONS: usize = 64;
/// Seed of the rotation sample used in three dimensions.
pub const ROTATION_SEED: u64 = 0x5eed_0f50;

/// Average of `f` over rotations of its argument.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphericalMean {
    pub function: SampledFunction,
    /// True when the rotation group was sampled at random (three dimensions).
    pub monte_carlo: bool,
}

type Rotation = [[f64; 3]; 3];

fn planar_rotations(count: usize) -> Vec<Rotation> {
    (0..count)
        .map(|k| {
            let a = std::f64::consts::TAU * k as f64 / count as f64;
            let (s, c) = a.sin_cos();
            [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]
        })
        .collect()
}

/// Haar-distributed rotations from normalized Gaussian quaternions.
fn random_rotations(count: usize, seed: u64) -> Vec<Rotation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut q = [0.0f64; 4];
            loop {
                for v in &mut q {
                    // Box-Muller from two uniforms.
                    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
                    let u2: f64 = rng.gen();
                    *v = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                }
                let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1e-12 {
                    q.iter_mut().for_each(|v| *v /= norm);
                    break;
                }
            }
            let [w, x, y, z] = q;
            [
                [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
                [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
                [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
            ]
        })
        .collect()
}

fn rotated_average(f: &SampledFunction, rotations: &[Rotation]) -> Vec<f64> {
    let grid: Grid = *f.grid();
    let dim = grid.dim();
    (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let x = grid.position(idx);
            let mut sum = 0.0;
            for rot in rotations {
                let mut ix = [0usize; 3];
                let mut inside = true;
                for (a, slot) in ix.iter_mut().enumerate().take(dim) {
                    let y: f64 = (0..dim).map(|b| rot[a][b] * x[b]).sum();
                    match grid.nearest_index(y) {
                        Some(i) => *slot = i,
                        None => {
                            inside = false;
                            break;
                        }
                    }
                }
                if inside {
                    sum += f.values()[grid.ravel(&ix[..dim])];
                }
            }
            sum / rotations.len() as f64
        })
        .collect()
}

/// Spherical mean with the default rotation sets.
pub fn spherical_mean(f: &SampledFunction) -> SphericalMean {
    spherical_mean_with(f, DEFAULT_ROTATIONS, ROTATION_SEED)
}

/// Spherical mean. One dimension averages `f(x)` and `f(-x)` exactly; two
/// dimensions use `rotations` equally spaced angles with nearest-node lookup;
/// three dimensions draw `rotations` random rotations from `seed`. Rotated
/// points outside the grid contribute zero.
pub fn spherical_mean_with(f: &SampledFunction, rotations: usize, seed: u64) -> SphericalMean {
    let grid = *f.grid();
    let rotations = rotations.max(1);
    match grid.dim() {
        1 => {
            let v = f.values();
            let m = v.len();
            let out = (0..m).map(|i| 0.5 * (v[i] + v[m - 1 - i])).collect();
            SphericalMean { function: SampledFunction::from_raw(grid, out), monte_carlo: false }
        }
        2 => SphericalMean {
            function: SampledFunction::from_raw(grid, rotated_average(f, &planar_rotations(rotations))),
            monte_carlo: false,
        },
        _ => SphericalMean {
            function: SampledFunction::from_raw(grid, rotated_average(f, &random_rotations(rotations, seed))),
            monte_carlo: true,
        },
    }
}
