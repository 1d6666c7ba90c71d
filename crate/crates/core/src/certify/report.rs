use crate::error::{Error, Result};
use crate::mixed_lebesgue::MixedExponent;
use crate::morrey_herz::{RadialGrid, RadialGridSpec, RadialWeight};
use crate::operators::log_times;
use serde::{Deserialize, Serialize};

/// Version tag written into every serialized report.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Parameters shared by the registry entries. Fields a given entry does not
/// use are ignored by it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertifyParams {
    /// Inner exponent; `None` means `2` in every coordinate.
    pub p: Option<MixedExponent>,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub theta: f64,
    pub lambda: f64,
    /// Outer weight; `None` means `r^(-lambda - 1/theta)`.
    pub weight: Option<RadialWeight>,
    /// Aggregation exponent of vector-valued inequalities (`v` or `u`).
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub v: f64,
    /// Atom integrability exponent; `None` means `4` in every coordinate.
    pub s: Option<MixedExponent>,
    /// Moment degree of the atomic decomposition.
    pub degree: usize,
    pub atom_levels: [i32; 2],
    pub half_width: f64,
    pub rgrid: RadialGridSpec,
    pub t_min: f64,
    pub t_max: f64,
    pub t_count: usize,
    /// Radius `r` of the split `f = f chi_{Q(5r)} + f (1 - chi_{Q(5r)})`.
    pub split_radius: f64,
    /// Relative slack of bracket-type verdicts.
    pub epsilon: f64,
    /// Slack of the lower heat bound.
    pub heat_slack: f64,
    /// Largest accepted relative change of `max_ratio` between resolutions.
    pub drift_threshold: f64,
    /// Random block sums per corpus entry in the pairing test.
    pub block_sums_per_entry: usize,
    /// Range of `j` for block radii `2^j`.
    pub block_levels: [i32; 2],
    pub seed: u64,
}

impl Default for CertifyParams {
    fn default() -> Self {
        CertifyParams {
            p: None,
            theta: 2.0,
            lambda: 0.25,
            weight: None,
            v: 2.0,
            s: None,
            degree: 1,
            atom_levels: [-4, 4],
            half_width: 4.0,
            rgrid: RadialGridSpec { j_min: -12, j_max: 12, points_per_octave: 16 },
            t_min: 1e-5,
            t_max: 16.0,
            t_count: 22,
            split_radius: 0.5,
            epsilon: 0.05,
            heat_slack: 0.02,
            drift_threshold: 0.1,
            block_sums_per_entry: 4,
            block_levels: [-3, 2],
            seed: super::corpus::DEFAULT_CORPUS_SEED,
        }
    }
}

impl CertifyParams {
    pub fn p_for(&self, dim: usize) -> Result<MixedExponent> {
        match &self.p {
            Some(p) if p.len() == dim => Ok(p.clone()),
            Some(_) => Err(Error::config("params.p", "length must equal the corpus dimension")),
            None => MixedExponent::uniform(2.0, dim),
        }
    }

    pub fn s_for(&self, dim: usize) -> Result<MixedExponent> {
        match &self.s {
            Some(s) if s.len() == dim => Ok(s.clone()),
            Some(_) => Err(Error::config("params.s", "length must equal the corpus dimension")),
            None => MixedExponent::uniform(4.0, dim),
        }
    }

    pub fn weight_or_default(&self) -> RadialWeight {
        self.weight.clone().unwrap_or_else(|| RadialWeight::morrey(self.lambda, self.theta))
    }

    pub fn radial_grid(&self) -> Result<RadialGrid> {
        RadialGrid::try_from(self.rgrid)
    }

    pub fn heat_times(&self) -> Result<Vec<f64>> {
        log_times(self.t_min, self.t_max, self.t_count)
    }
}

/// One evaluated corpus entry at one resolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub function_id: String,
    pub resolution: usize,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub lhs: f64,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub rhs: f64,
    /// `lhs / rhs`; absent when `rhs = 0`.
    #[serde(with = "crate::serde_ext::ext_opt")]
    pub ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    /// The inequality holds up to a constant; the empirical constant is stable.
    ConstantReport,
    /// The empirical constant drifts across resolutions beyond the threshold.
    Unstable,
    /// A hypothesis of the statement is not met; values are reported without a verdict.
    HypothesesUnmet,
    /// Every right-hand side vanished.
    VacuousPass,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::ConstantReport => "constant-report",
            Verdict::Unstable => "unstable",
            Verdict::HypothesesUnmet => "hypotheses-unmet",
            Verdict::VacuousPass => "vacuous-pass",
        }
    }

    /// Verdicts that make the command line exit with the failure status.
    pub fn is_failure(&self) -> bool {
        matches!(self, Verdict::Fail | Verdict::Unstable)
    }
}

/// A precondition of a statement and whether it was established.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub satisfied: bool,
    pub detail: String,
}

/// An auxiliary property computed alongside the rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuxCheck {
    pub name: String,
    pub passed: bool,
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub value: f64,
    pub detail: String,
}

/// Admissible range of the ratio for two-sided statements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    #[serde(with = "crate::serde_ext::ext_opt")]
    pub lower: Option<f64>,
    #[serde(with = "crate::serde_ext::ext_opt")]
    pub upper: Option<f64>,
}

impl Bracket {
    pub fn contains(&self, x: f64) -> bool {
        self.lower.is_none_or(|l| x >= l) && self.upper.is_none_or(|u| x <= u)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub schema_version: u32,
    pub inequality_name: String,
    pub dim: usize,
    pub params: CertifyParams,
    pub resolutions: Vec<usize>,
    pub hypotheses: Vec<HypothesisCheck>,
    /// Present for bracket-type statements.
    pub bracket: Option<Bracket>,
    /// Rows with `rhs > 0`, sorted by id and resolution.
    pub rows: Vec<ReportRow>,
    /// Rows with `rhs = 0`.
    pub zero_rhs_rows: Vec<ReportRow>,
    #[serde(with = "crate::serde_ext::ext_vec_opt")]
    pub max_ratio_by_resolution: Vec<Option<f64>>,
    #[serde(with = "crate::serde_ext::ext_vec_opt")]
    pub min_ratio_by_resolution: Vec<Option<f64>>,
    /// Largest ratio at the finest resolution.
    #[serde(with = "crate::serde_ext::ext_opt")]
    pub max_ratio: Option<f64>,
    /// Relative change of `max_ratio` between the two finest resolutions.
    #[serde(with = "crate::serde_ext::ext_opt")]
    pub drift: Option<f64>,
    pub checks: Vec<AuxCheck>,
    pub notes: Vec<String>,
    pub verdict: Verdict,
}

impl InequalityReport {
    pub fn hypotheses_met(&self) -> bool {
        self.hypotheses.iter().all(|h| h.satisfied)
    }

    /// Every row, including vanishing right-hand sides, in id/resolution order.
    pub fn all_rows(&self) -> Vec<&ReportRow> {
        let mut all: Vec<&ReportRow> = self.rows.iter().chain(&self.zero_rhs_rows).collect();
        all.sort_by(|a, b| a.function_id.cmp(&b.function_id).then(a.resolution.cmp(&b.resolution)));
        all
    }

    pub fn check(&self, name: &str) -> Option<&AuxCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Relative change `|b - a| / |a|`; zero when the values agree and infinite
/// when `a` vanishes or either value is not finite.
pub(crate) fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else if a == 0.0 || !a.is_finite() || !b.is_finite() {
        f64::INFINITY
    } else {
        (b - a).abs() / a.abs()
    }
}

/// Assembles a report from raw `(id, resolution, lhs, rhs)` rows.
pub(crate) struct Assembly {
    pub name: String,
    pub dim: usize,
    pub params: CertifyParams,
    pub resolutions: Vec<usize>,
    pub hypotheses: Vec<HypothesisCheck>,
    pub bracket: Option<Bracket>,
    pub raw: Vec<(String, usize, f64, f64)>,
    pub checks: Vec<AuxCheck>,
    pub notes: Vec<String>,
}

impl Assembly {
    pub fn finish(self) -> InequalityReport {
        let mut rows = Vec::new();
        let mut zero_rhs_rows = Vec::new();
        for (id, res, lhs, rhs) in self.raw {
            if rhs > 0.0 {
                rows.push(ReportRow { function_id: id, resolution: res, lhs, rhs, ratio: Some(lhs / rhs) });
            } else {
                zero_rhs_rows.push(ReportRow { function_id: id, resolution: res, lhs, rhs, ratio: None });
            }
        }
        let order = |a: &ReportRow, b: &ReportRow| a.function_id.cmp(&b.function_id).then(a.resolution.cmp(&b.resolution));
        rows.sort_by(order);
        zero_rhs_rows.sort_by(order);
        let per_res = |pick: fn(f64, f64) -> f64| -> Vec<Option<f64>> {
            self.resolutions
                .iter()
                .map(|m| {
                    rows.iter()
                        .filter(|r| r.resolution == *m)
                        .filter_map(|r| r.ratio)
                        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| pick(a, x))))
                })
                .collect()
        };
        let max_ratio_by_resolution = per_res(f64::max);
        let min_ratio_by_resolution = per_res(f64::min);
        let max_ratio = max_ratio_by_resolution.last().copied().flatten();
        let drift = match max_ratio_by_resolution.len() {
            0 | 1 => None,
            k => match (max_ratio_by_resolution[k - 2], max_ratio_by_resolution[k - 1]) {
                (Some(a), Some(b)) => Some(relative_change(a, b)),
                _ => None,
            },
        };
        let hypotheses_met = self.hypotheses.iter().all(|h| h.satisfied);
        let verdict = if rows.is_empty() {
            Verdict::VacuousPass
        } else if !hypotheses_met {
            Verdict::HypothesesUnmet
        } else if let Some(b) = self.bracket {
            if rows.iter().all(|r| r.ratio.is_some_and(|x| x.is_finite() && b.contains(x))) {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        } else if rows.iter().all(|r| r.ratio.is_some_and(f64::is_finite))
            && drift.is_none_or(|d| d < self.params.drift_threshold)
        {
            Verdict::ConstantReport
        } else {
            Verdict::Unstable
        };
        InequalityReport {
            schema_version: REPORT_SCHEMA_VERSION,
            inequality_name: self.name,
            dim: self.dim,
            params: self.params,
            resolutions: self.resolutions,
            hypotheses: self.hypotheses,
            bracket: self.bracket,
            rows,
            zero_rhs_rows,
            max_ratio_by_resolution,
            min_ratio_by_resolution,
            max_ratio,
            drift,
            checks: self.checks,
            notes: self.notes,
            verdict,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assembly(raw: Vec<(String, usize, f64, f64)>, bracket: Option<Bracket>, met: bool) -> Assembly {
        Assembly {
            name: "t".into(),
            dim: 1,
            params: CertifyParams::default(),
            resolutions: vec![65, 129],
            hypotheses: vec![HypothesisCheck { name: "h".into(), satisfied: met, detail: String::new() }],
            bracket,
            raw,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn row(id: &str, m: usize, lhs: f64, rhs: f64) -> (String, usize, f64, f64) {
        (id.to_string(), m, lhs, rhs)
    }

    #[test]
    fn verdict_precedence() {
        let zero = vec![row("a", 65, 1.0, 0.0), row("a", 129, 0.0, 0.0)];
        assert_eq!(assembly(zero, None, false).finish().verdict, Verdict::VacuousPass);
        let ok = vec![row("a", 65, 1.0, 1.0), row("a", 129, 1.02, 1.0)];
        assert_eq!(assembly(ok.clone(), None, false).finish().verdict, Verdict::HypothesesUnmet);
        assert_eq!(assembly(ok.clone(), None, true).finish().verdict, Verdict::ConstantReport);
        let b = Bracket { lower: Some(0.9), upper: Some(1.01) };
        assert_eq!(assembly(ok.clone(), Some(b), true).finish().verdict, Verdict::Fail);
        let b = Bracket { lower: Some(0.9), upper: Some(1.1) };
        assert_eq!(assembly(ok, Some(b), true).finish().verdict, Verdict::Pass);
        let drifting = vec![row("a", 65, 1.0, 1.0), row("a", 129, 2.0, 1.0)];
        let rep = assembly(drifting, None, true).finish();
        assert_eq!(rep.verdict, Verdict::Unstable);
        assert!(rep.verdict.is_failure());
        assert_eq!(rep.drift, Some(1.0));
    }

    #[test]
    fn rows_sorted_and_split() {
        let raw = vec![row("b", 129, 1.0, 2.0), row("a", 129, 1.0, 0.0), row("b", 65, 1.0, 4.0)];
        let rep = assembly(raw, None, true).finish();
        assert_eq!(rep.rows.len(), 2);
        assert_eq!(rep.rows[0].resolution, 65);
        assert_eq!(rep.zero_rhs_rows[0].ratio, None);
        assert_eq!(rep.max_ratio_by_resolution, vec![Some(0.25), Some(0.5)]);
        assert_eq!(rep.max_ratio, Some(0.5));
        assert_eq!(rep.all_rows().iter().map(|r| r.function_id.as_str()).collect::<Vec<_>>(), ["a", "b", "b"]);
    }

    #[test]
    fn json_round_trip_with_infinities() {
        let raw = vec![row("a", 65, f64::INFINITY, 1.0), row("a", 129, 1.0, 1.0)];
        let mut params = CertifyParams::default();
        params.theta = f64::INFINITY;
        let mut a = assembly(raw, None, true);
        a.params = params;
        let rep = a.finish();
        assert_eq!(rep.verdict, Verdict::Unstable);
        let back = InequalityReport::from_json(&rep.to_json().unwrap()).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn bracket_bounds() {
        let b = Bracket { lower: None, upper: Some(1.0) };
        assert!(b.contains(-5.0) && b.contains(1.0) && !b.contains(1.0 + 1e-12));
        assert_eq!(relative_change(0.0, 0.0), 0.0);
        assert_eq!(relative_change(0.0, 1.0), f64::INFINITY);
        assert_eq!(relative_change(f64::INFINITY, 1.0), f64::INFINITY);
    }
}
