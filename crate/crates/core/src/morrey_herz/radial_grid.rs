use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Log-uniform radii `2^(j_min + k/ppo)` covering `[2^j_min, 2^j_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RadialGridSpec", into = "RadialGridSpec")]
pub struct RadialGrid {
    j_min: i32,
    j_max: i32,
    points_per_octave: usize,
    nodes: Vec<f64>,
}

/// Serialized form of a [`RadialGrid`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGridSpec {
    pub j_min: i32,
    pub j_max: i32,
    pub points_per_octave: usize,
}

impl TryFrom<RadialGridSpec> for RadialGrid {
    type Error = Error;
    fn try_from(s: RadialGridSpec) -> Result<Self> {
        RadialGrid::new(s.j_min, s.j_max, s.points_per_octave)
    }
}

impl From<RadialGrid> for RadialGridSpec {
    fn from(g: RadialGrid) -> Self {
        RadialGridSpec { j_min: g.j_min, j_max: g.j_max, points_per_octave: g.points_per_octave }
    }
}

impl RadialGrid {
    pub fn new(j_min: i32, j_max: i32, points_per_octave: usize) -> Result<Self> {
        if j_min >= j_max {
            return Err(Error::param(format!("radial range needs j_min < j_max, got [{j_min}, {j_max}]")));
        }
        if points_per_octave < 8 {
            return Err(Error::param(format!("need at least 8 points per octave, got {points_per_octave}")));
        }
        let count = (j_max - j_min) as usize * points_per_octave + 1;
        let nodes = (0..count)
            .map(|k| {
                let e = j_min as f64 + k as f64 / points_per_octave as f64;
                e.exp2()
            })
            .collect();
        Ok(RadialGrid { j_min, j_max, points_per_octave, nodes })
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn points_per_octave(&self) -> usize {
        self.points_per_octave
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Spacing in `ln r`.
    pub fn du(&self) -> f64 {
        std::f64::consts::LN_2 / self.points_per_octave as f64
    }

    /// Same density over `[2^(j_min - lo), 2^(j_max + hi)]`.
    pub fn extended(&self, lo: i32, hi: i32) -> Result<Self> {
        RadialGrid::new(self.j_min - lo, self.j_max + hi, self.points_per_octave)
    }

    pub fn spec(&self) -> RadialGridSpec {
        RadialGridSpec { j_min: self.j_min, j_max: self.j_max, points_per_octave: self.points_per_octave }
    }
}

/// `(sum_k c_k F_k^theta m_k du)^(1/theta)` over `nodes[range]` with trapezoid
/// end weights `c_k`; `measure[k]` is `r_k` for `dr` and `1` for `dr/r`.
/// `theta = inf` takes the maximum.
pub(crate) fn log_trapezoid_norm(values: &[f64], measure: &[f64], du: f64, theta: f64, lo: usize, hi: usize) -> f64 {
    if hi <= lo {
        return values.get(lo).copied().unwrap_or(0.0).abs();
    }
    let seg = &values[lo..=hi];
    let scale = seg.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if theta.is_infinite() || scale == 0.0 {
        return scale;
    }
    let mut s = 0.0;
    for k in lo..=hi {
        let c = if k == lo || k == hi { 0.5 } else { 1.0 };
        let v = values[k].abs() / scale;
        if v > 0.0 {
            s += c * v.powf(theta) * measure[k];
        }
    }
    scale * (s * du).powf(1.0 / theta)
}
