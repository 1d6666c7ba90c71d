use super::corpus::Corpus;
use super::report::{relative_change, ReportRow};
use crate::error::{Error, Result};
use crate::mixed_lebesgue::{mixed_norm, MixedExponent};
use crate::morrey_herz::{lm_lambda_norm, lm_norm, MorreyParams, RadialGrid, RadialGridSpec};
use crate::operators::{hardy_nd, heat_sup, hl_maximal, spherical_mean};
use crate::sampled::{Grid, SampledFunction};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorName {
    #[serde(rename = "M")]
    Maximal,
    #[serde(rename = "H")]
    Hardy,
    #[serde(rename = "H*")]
    HardyDual,
    #[serde(rename = "heat_sup")]
    HeatSup,
    #[serde(rename = "S")]
    Spherical,
}

impl OperatorName {
    pub const ALL: [OperatorName; 5] =
        [OperatorName::Maximal, OperatorName::Hardy, OperatorName::HardyDual, OperatorName::HeatSup, OperatorName::Spherical];

    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorName::Maximal => "M",
            OperatorName::Hardy => "H",
            OperatorName::HardyDual => "H*",
            OperatorName::HeatSup => "heat_sup",
            OperatorName::Spherical => "S",
        }
    }
}

impl fmt::Display for OperatorName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OperatorName::ALL
            .into_iter()
            .find(|o| o.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown operator `{s}`; expected one of M, H, H*, heat_sup, S")))
    }
}

/// Function space in which operator norms are measured.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormSpace {
    Lebesgue { p: MixedExponent },
    /// Weighted norm when `params.weight` is set, otherwise the `lambda` norm.
    Morrey { params: MorreyParams, rgrid: RadialGridSpec },
}

impl NormSpace {
    pub fn norm(&self, f: &SampledFunction) -> Result<f64> {
        match self {
            NormSpace::Lebesgue { p } => mixed_norm(f, p, None),
            NormSpace::Morrey { params, rgrid } => {
                let rg = RadialGrid::try_from(*rgrid)?;
                if params.weight.is_some() {
                    Ok(lm_norm(f, params, &rg)?.value)
                } else {
                    Ok(lm_lambda_norm(f, params, &rg)?.value)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorOptions {
    pub half_width: f64,
    /// Times of the heat maximal function.
    pub heat_times: Vec<f64>,
}

impl Default for OperatorOptions {
    fn default() -> Self {
        OperatorOptions {
            half_width: 4.0,
            heat_times: crate::operators::log_times(1e-5, 16.0, 22).expect("valid default times"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorNormReport {
    pub op: OperatorName,
    pub space: NormSpace,
    pub resolutions: Vec<usize>,
    pub rows: Vec<ReportRow>,
    pub zero_rhs_rows: Vec<ReportRow>,
    pub estimate_by_resolution: Vec<f64>,
    /// Largest ratio at the finest resolution.
    pub estimate: f64,
    #[serde(with = "crate::serde_ext::ext_opt")]
    pub drift: Option<f64>,
}

/// `H* f(x) = int_{|x|}^R f(t) dt` along the positive half line, in one dimension.
fn hardy_dual_1d(f: &SampledFunction) -> Result<SampledFunction> {
    let grid = *f.grid();
    if grid.dim() != 1 {
        return Err(Error::Unsupported("H* acts on one-dimensional samples only".into()));
    }
    let m = grid.points();
    let c = grid.center_index();
    let h = grid.spacing();
    let v = f.values();
    let mut tail = vec![0.0; m];
    for k in (c..m - 1).rev() {
        tail[k] = tail[k + 1] + 0.5 * h * (v[k] + v[k + 1]);
    }
    let out = (0..m).map(|i| tail[c + i.abs_diff(c)]).collect();
    SampledFunction::from_values(grid, out)
}

pub fn apply_operator(op: OperatorName, f: &SampledFunction, options: &OperatorOptions) -> Result<SampledFunction> {
    Ok(match op {
        OperatorName::Maximal => hl_maximal(f),
        OperatorName::Hardy => hardy_nd(f),
        OperatorName::HardyDual => hardy_dual_1d(f)?,
        OperatorName::HeatSup => heat_sup(f, &options.heat_times)?.function,
        OperatorName::Spherical => spherical_mean(f).function,
    })
}

/// Largest `||op f|| / ||f||` over the corpus at each resolution.
pub fn estimate_operator_norm(
    op: OperatorName,
    space: &NormSpace,
    corpus: &Corpus,
    resolutions: &[usize],
    options: &OperatorOptions,
) -> Result<OperatorNormReport> {
    if resolutions.is_empty() {
        return Err(Error::param("at least one resolution is required"));
    }
    let mut rows = Vec::new();
    let mut zero_rhs_rows = Vec::new();
    let mut estimate_by_resolution = Vec::new();
    for &m in resolutions {
        let grid = Grid::new(corpus.dim, options.half_width, m)?;
        let fs = corpus.sample(&grid)?;
        let vals: Vec<(f64, f64)> = fs
            .par_iter()
            .map(|f| Ok((space.norm(&apply_operator(op, f, options)?)?, space.norm(f)?)))
            .collect::<Result<_>>()?;
        let mut best: Option<f64> = None;
        for (e, (lhs, rhs)) in corpus.entries.iter().zip(vals) {
            let row = ReportRow { function_id: e.id.clone(), resolution: m, lhs, rhs, ratio: None };
            if rhs > 0.0 {
                let ratio = lhs / rhs;
                best = Some(best.map_or(ratio, |b| b.max(ratio)));
                rows.push(ReportRow { ratio: Some(ratio), ..row });
            } else {
                zero_rhs_rows.push(row);
            }
        }
        let best = best.ok_or_else(|| Error::param("every corpus function has zero norm; the estimate is undefined"))?;
        estimate_by_resolution.push(best);
    }
    let order = |a: &ReportRow, b: &ReportRow| a.function_id.cmp(&b.function_id).then(a.resolution.cmp(&b.resolution));
    rows.sort_by(order);
    zero_rhs_rows.sort_by(order);
    let k = estimate_by_resolution.len();
    let drift = (k >= 2).then(|| relative_change(estimate_by_resolution[k - 2], estimate_by_resolution[k - 1]));
    Ok(OperatorNormReport {
        op,
        space: space.clone(),
        resolutions: resolutions.to_vec(),
        rows,
        zero_rhs_rows,
        estimate: estimate_by_resolution[k - 1],
        estimate_by_resolution,
        drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::corpus::{build_corpus, CorpusConfig};

    fn l2(dim: usize) -> NormSpace {
        NormSpace::Lebesgue { p: MixedExponent::uniform(2.0, dim).unwrap() }
    }

    fn corpus_1d() -> Corpus {
        let p = MixedExponent::uniform(2.0, 1).unwrap();
        build_corpus(&CorpusConfig::standard(1, &p)).unwrap()
    }

    #[test]
    fn spherical_mean_norm_is_one_in_1d() {
        let rep =
            estimate_operator_norm(OperatorName::Spherical, &l2(1), &corpus_1d(), &[129, 257], &OperatorOptions::default())
                .unwrap();
        assert_eq!(rep.estimate, 1.0);
        assert!(rep.rows.iter().all(|r| r.ratio.unwrap() <= 1.0 + 1e-15));
    }

    #[test]
    fn maximal_norm_at_least_one() {
        let rep = estimate_operator_norm(OperatorName::Maximal, &l2(1), &corpus_1d(), &[129], &OperatorOptions::default())
            .unwrap();
        assert!(rep.rows.iter().all(|r| r.ratio.unwrap() >= 1.0));
        assert!(rep.drift.is_none());
    }

    #[test]
    fn zero_corpus_is_an_error() {
        let z = Corpus::zeros(1, 3).unwrap();
        assert!(estimate_operator_norm(OperatorName::Maximal, &l2(1), &z, &[65], &OperatorOptions::default()).is_err());
    }

    #[test]
    fn hardy_dual_of_indicator() {
        let g = Grid::new(1, 2.0, 33).unwrap();
        let f = SampledFunction::constant(g, 1.0).unwrap();
        let h = hardy_dual_1d(&f).unwrap();
        for i in 0..g.points() {
            assert!((h.values()[i] - (2.0 - g.coord(i).abs())).abs() < 1e-12);
        }
        assert!(hardy_dual_1d(&SampledFunction::zeros(Grid::new(2, 1.0, 17).unwrap())).is_err());
        assert_eq!("H*".parse::<OperatorName>().unwrap(), OperatorName::HardyDual);
        assert!("Q".parse::<OperatorName>().is_err());
    }
}
