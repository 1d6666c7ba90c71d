use super::operator_norm::NormSpace;
use super::report::relative_change;
use crate::error::{Error, Result};
use crate::sampled::{sample, FunctionSpec, Grid};
use serde::{Deserialize, Serialize};

/// Norm of one analytic function, to be evaluated at several resolutions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceJob {
    pub dim: usize,
    pub half_width: f64,
    pub spec: FunctionSpec,
    pub space: NormSpace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub resolution: usize,
    pub spacing: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    /// Richardson extrapolation from the last three rows, or the last value.
    pub extrapolated: f64,
    /// `log(|v1 - v2| / |v2 - v3|) / log(h2 / h3)` from the last three rows.
    #[serde(with = "crate::serde_ext::ext_opt")]
    pub observed_order: Option<f64>,
    /// Relative change between the two finest values.
    pub drift: f64,
}

/// Tabulates `eval(m)` and extrapolates in the grid spacing.
pub fn convergence_study_with(
    resolutions: &[usize],
    half_width: f64,
    eval: impl Fn(usize) -> Result<f64>,
) -> Result<ConvergenceTable> {
    if resolutions.len() < 2 {
        return Err(Error::param("a convergence study needs at least two resolutions"));
    }
    let rows: Vec<ConvergenceRow> = resolutions
        .iter()
        .map(|&m| {
            Ok(ConvergenceRow { resolution: m, spacing: 2.0 * half_width / (m as f64 - 1.0), value: eval(m)? })
        })
        .collect::<Result<_>>()?;
    let k = rows.len();
    let last = rows[k - 1].value;
    let drift = relative_change(rows[k - 2].value, last);
    let mut observed_order = None;
    let mut extrapolated = last;
    if k >= 3 {
        let (a, b, c) = (&rows[k - 3], &rows[k - 2], &rows[k - 1]);
        let d1 = (b.value - a.value).abs();
        let d2 = (c.value - b.value).abs();
        if d1 > 0.0 && d2 > 0.0 {
            let order = (d1 / d2).ln() / (b.spacing / c.spacing).ln();
            observed_order = Some(order);
            let factor = (b.spacing / c.spacing).powf(order);
            if factor != 1.0 {
                extrapolated = c.value + (c.value - b.value) / (factor - 1.0);
            }
        }
    }
    Ok(ConvergenceTable { rows, extrapolated, observed_order, drift })
}

/// Runs `job` at each resolution.
pub fn convergence_study(job: &ConvergenceJob, resolutions: &[usize]) -> Result<ConvergenceTable> {
    job.spec.validate()?;
    convergence_study_with(resolutions, job.half_width, |m| {
        let grid = Grid::new(job.dim, job.half_width, m)?;
        job.space.norm(&sample(&job.spec, &grid)?)
    })
}
