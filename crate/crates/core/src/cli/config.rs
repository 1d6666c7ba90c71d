//! Job configuration files and their validation.

use crate::certify::{
    build_corpus, default_resolutions, registry_hypotheses, CertifyParams, Corpus, CorpusConfig, NormSpace,
    OperatorName, OperatorOptions, REGISTRY,
};
use crate::error::{Error, Result};
use crate::mixed_lebesgue::{MixedExponent, Shape};
use crate::morrey_herz::{
    herz_norm, hlm_norm, lm_dyadic_norm, lm_lambda_norm, lm_norm, MorreyParams, NormValue, RadialGrid, RadialGridSpec,
    RadialWeight,
};
use crate::mixed_lebesgue::mixed_norm;
use crate::operators::log_times;
use crate::sampled::{FunctionSpec, Grid, SampledFunction};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobKind {
    Norm,
    Operator,
    Decompose,
    Certify,
    Sweep,
}

impl fmt::Display for JobKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            JobKind::Norm => "norm",
            JobKind::Operator => "operator",
            JobKind::Decompose => "decompose",
            JobKind::Certify => "certify",
            JobKind::Sweep => "sweep",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub dim: Option<usize>,
    pub half_width: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    Mixed,
    Lm,
    LmLambda,
    LmDyadic,
    Herz,
    Hlm,
}

impl NormKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormKind::Mixed => "mixed",
            NormKind::Lm => "lm",
            NormKind::LmLambda => "lm_lambda",
            NormKind::LmDyadic => "lm_dyadic",
            NormKind::Herz => "herz",
            NormKind::Hlm => "hlm",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormSection {
    pub space: Option<NormKind>,
    pub p: Option<MixedExponent>,
    #[serde(default, with = "crate::serde_ext::ext_opt")]
    pub theta: Option<f64>,
    pub lambda: Option<f64>,
    pub weight: Option<RadialWeight>,
    pub shape: Option<Shape>,
    /// Herz smoothness index.
    pub alpha: Option<f64>,
    /// Herz outer exponent.
    #[serde(default, with = "crate::serde_ext::ext_opt")]
    pub outer_p: Option<f64>,
    /// Dyadic range of the Herz and dyadic Morrey norms.
    pub j_min: Option<i32>,
    pub j_max: Option<i32>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_count: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSection {
    pub name: Option<String>,
    pub t_min: Option<f64>,
    pub t_max: Option<f64>,
    pub t_count: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecomposeMethod {
    #[default]
    Atomic,
    Cz,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeSection {
    #[serde(default)]
    pub method: DecomposeMethod,
    pub degree: Option<usize>,
    /// Level range of the atomic decomposition.
    pub levels: Option<[i32; 2]>,
    /// Height exponent of the Calderón–Zygmund decomposition.
    pub level: Option<i32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySection {
    #[serde(default)]
    pub inequalities: Vec<String>,
    /// Run even when a registry hypothesis fails; the verdict is then withheld.
    #[serde(default)]
    pub allow_unmet_hypotheses: bool,
    #[serde(default)]
    pub params: CertifyParams,
}

/// One job, as read from a TOML file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub kind: Option<JobKind>,
    /// Stem of the output files; defaults to the config file stem.
    pub name: Option<String>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
    pub resolutions: Option<Vec<usize>>,
    pub grid: Option<GridSection>,
    pub radial: Option<RadialGridSpec>,
    pub function_id: Option<String>,
    pub function: Option<FunctionSpec>,
    pub norm: Option<NormSection>,
    pub operator: Option<OperatorSection>,
    pub corpus: Option<CorpusConfig>,
    pub decompose: Option<DecomposeSection>,
    pub certify: Option<CertifySection>,
}

impl JobConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| line_col(text, s.start)).unwrap_or_else(|| "config".into());
            Error::config(field, e.message().to_string())
        })
    }
}

fn line_col(text: &str, offset: usize) -> String {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    format!("line {line}, column {col}")
}

/// Command-line overrides applied on top of a config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub resolutions: Option<Vec<usize>>,
    pub format: Option<Format>,
}

/// A norm evaluator with every parameter resolved.
#[derive(Debug, Clone)]
pub enum NormJob {
    Mixed { p: MixedExponent },
    Lm { params: MorreyParams, rgrid: RadialGrid },
    LmLambda { params: MorreyParams, rgrid: RadialGrid },
    Dyadic { params: MorreyParams, j_min: i32, j_max: i32 },
    Herz { alpha: f64, outer_p: f64, q: MixedExponent, j_min: i32, j_max: i32 },
    Hlm { params: MorreyParams, rgrid: RadialGrid, times: Vec<f64> },
}

impl NormJob {
    pub fn kind(&self) -> NormKind {
        match self {
            NormJob::Mixed { .. } => NormKind::Mixed,
            NormJob::Lm { .. } => NormKind::Lm,
            NormJob::LmLambda { .. } => NormKind::LmLambda,
            NormJob::Dyadic { .. } => NormKind::LmDyadic,
            NormJob::Herz { .. } => NormKind::Herz,
            NormJob::Hlm { .. } => NormKind::Hlm,
        }
    }

    pub fn eval(&self, f: &SampledFunction) -> Result<NormValue> {
        let plain = |value| NormValue { value, outer_sensitivity: 0.0, inner_sensitivity: 0.0, truncation_flag: false };
        match self {
            NormJob::Mixed { p } => Ok(plain(mixed_norm(f, p, None)?)),
            NormJob::Lm { params, rgrid } => lm_norm(f, params, rgrid),
            NormJob::LmLambda { params, rgrid } => lm_lambda_norm(f, params, rgrid),
            NormJob::Dyadic { params, j_min, j_max } => Ok(plain(lm_dyadic_norm(f, params, *j_min, *j_max)?)),
            NormJob::Herz { alpha, outer_p, q, j_min, j_max } => {
                Ok(plain(herz_norm(f, *alpha, *outer_p, q, *j_min, *j_max)?))
            }
            NormJob::Hlm { params, rgrid, times } => hlm_norm(f, params, rgrid, times),
        }
    }

    /// The same norm as a space for operator-norm estimates, when supported.
    pub fn space(&self) -> Option<NormSpace> {
        match self {
            NormJob::Mixed { p } => Some(NormSpace::Lebesgue { p: p.clone() }),
            NormJob::Lm { params, rgrid } | NormJob::LmLambda { params, rgrid } => {
                Some(NormSpace::Morrey { params: params.clone(), rgrid: rgrid.spec() })
            }
            _ => None,
        }
    }
}

/// A fully validated job.
#[derive(Debug, Clone)]
pub enum Job {
    Norm { function_id: String, spec: FunctionSpec, grid: Grid, norm: NormJob },
    Operator { op: OperatorName, space: NormSpace, corpus: Corpus, resolutions: Vec<usize>, options: OperatorOptions },
    Decompose { function_id: String, spec: FunctionSpec, grid: Grid, section: DecomposeSection },
    Certify { names: Vec<String>, params: CertifyParams, corpus: Corpus, resolutions: Vec<usize> },
    Sweep { function_id: String, spec: FunctionSpec, dim: usize, half_width: f64, norm: NormJob, resolutions: Vec<usize> },
}

fn missing(field: &str, why: &str) -> Error {
    Error::config(field, format!("missing; {why}"))
}

/// Maps a library error raised while checking `field` to a config error naming it.
fn at(field: &str) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::config(field, other.to_string()),
    }
}

fn positive_times(t_min: f64, t_max: f64, count: usize, field: &str) -> Result<Vec<f64>> {
    log_times(t_min, t_max, count).map_err(at(field))
}

impl JobConfig {
    fn grid_dim(&self) -> Option<usize> {
        self.grid.as_ref().and_then(|g| g.dim)
    }

    fn half_width(&self) -> Result<f64> {
        let hw = self.grid.as_ref().and_then(|g| g.half_width).unwrap_or(4.0);
        if !(hw > 0.0 && hw.is_finite()) {
            return Err(Error::config("grid.half_width", "must be positive and finite"));
        }
        Ok(hw)
    }

    fn require_dim(&self) -> Result<usize> {
        let dim = self.grid_dim().ok_or_else(|| missing("grid.dim", "the grid dimension is required"))?;
        if !(1..=3).contains(&dim) {
            return Err(Error::config("grid.dim", format!("must be 1, 2 or 3, got {dim}")));
        }
        Ok(dim)
    }

    fn require_function(&self, dim: usize) -> Result<FunctionSpec> {
        let spec = self.function.clone().ok_or_else(|| missing("function", "this job evaluates one function"))?;
        spec.validate().map_err(at("function"))?;
        let g = Grid::new(dim, 1.0, 17).map_err(at("grid"))?;
        crate::sampled::sample(&spec, &g).map_err(at("function"))?;
        Ok(spec)
    }

    fn radial(&self) -> Result<RadialGrid> {
        let spec = self.radial.unwrap_or(CertifyParams::default().rgrid);
        RadialGrid::try_from(spec).map_err(at("radial"))
    }

    fn resolutions(&self, over: &Overrides, field_default: impl FnOnce() -> Result<Vec<usize>>) -> Result<Vec<usize>> {
        let r = match (&over.resolutions, &self.resolutions) {
            (Some(r), _) | (None, Some(r)) => r.clone(),
            (None, None) => field_default()?,
        };
        if r.is_empty() {
            return Err(Error::config("resolutions", "at least one resolution is required"));
        }
        if let Some(m) = r.iter().find(|m| **m < crate::sampled::MIN_POINTS || **m % 2 == 0) {
            return Err(Error::config(
                "resolutions",
                format!("grid sizes must be odd and at least {}, got {m}", crate::sampled::MIN_POINTS),
            ));
        }
        Ok(r)
    }

    fn function_id(&self) -> String {
        self.function_id.clone().unwrap_or_else(|| "function".into())
    }

    fn norm_job(&self, dim: usize) -> Result<NormJob> {
        let n = self.norm.clone().ok_or_else(|| missing("norm", "the norm to evaluate is required"))?;
        let kind = n.space.ok_or_else(|| missing("norm.space", "one of mixed, lm, lm_lambda, lm_dyadic, herz, hlm"))?;
        let label = kind.as_str();
        let p = n.p.clone().ok_or_else(|| missing("norm.p", "the inner exponent is required"))?;
        if p.len() != dim {
            return Err(Error::config("norm.p", format!("has {} entries for a {dim}-dimensional grid", p.len())));
        }
        let theta = || n.theta.ok_or_else(|| missing("norm.theta", &format!("the outer exponent is required by the {label} norm")));
        let lambda = || n.lambda.ok_or_else(|| missing("norm.lambda", &format!("the Morrey index is required by the {label} norm")));
        let shape = n.shape.unwrap_or_default();
        let check_theta = |t: f64| {
            if t > 0.0 {
                Ok(t)
            } else {
                Err(Error::config("norm.theta", format!("must be positive, got {t}")))
            }
        };
        let check_lambda = |l: f64| {
            if l >= 0.0 && l.is_finite() {
                Ok(l)
            } else {
                Err(Error::config("norm.lambda", format!("must be finite and nonnegative, got {l}")))
            }
        };
        let range = || -> Result<(i32, i32)> {
            let lo = n.j_min.ok_or_else(|| missing("norm.j_min", &format!("the dyadic range is required by the {label} norm")))?;
            let hi = n.j_max.ok_or_else(|| missing("norm.j_max", &format!("the dyadic range is required by the {label} norm")))?;
            if lo > hi {
                return Err(Error::config("norm.j_max", "must not be below norm.j_min"));
            }
            Ok((lo, hi))
        };
        let weight = |t: f64| -> Result<RadialWeight> {
            let w = match (&n.weight, n.lambda) {
                (Some(w), _) => w.clone(),
                (None, Some(l)) => RadialWeight::morrey(check_lambda(l)?, t),
                (None, None) => return Err(missing("norm.weight", &format!("the {label} norm needs a weight or a Morrey index"))),
            };
            w.validate().map_err(at("norm.weight"))?;
            Ok(w)
        };
        Ok(match kind {
            NormKind::Mixed => NormJob::Mixed { p },
            NormKind::Lm => {
                let t = check_theta(theta()?)?;
                let params = MorreyParams::weighted(p, t, weight(t)?).with_shape(shape);
                NormJob::Lm { params, rgrid: self.radial()? }
            }
            NormKind::LmLambda => {
                let params = MorreyParams::lambda(p, check_theta(theta()?)?, check_lambda(lambda()?)?).with_shape(shape);
                NormJob::LmLambda { params, rgrid: self.radial()? }
            }
            NormKind::LmDyadic => {
                let params = MorreyParams::lambda(p, check_theta(theta()?)?, check_lambda(lambda()?)?);
                let (j_min, j_max) = range()?;
                NormJob::Dyadic { params, j_min, j_max }
            }
            NormKind::Herz => {
                let alpha = n.alpha.ok_or_else(|| missing("norm.alpha", "the Herz index is required by the herz norm"))?;
                let outer_p =
                    n.outer_p.ok_or_else(|| missing("norm.outer_p", "the outer exponent is required by the herz norm"))?;
                if !(outer_p > 0.0) {
                    return Err(Error::config("norm.outer_p", "must be positive"));
                }
                let (j_min, j_max) = range()?;
                NormJob::Herz { alpha, outer_p, q: p, j_min, j_max }
            }
            NormKind::Hlm => {
                let t = check_theta(theta()?)?;
                let params = MorreyParams::weighted(p, t, weight(t)?).with_shape(shape);
                let times = positive_times(
                    n.t_min.unwrap_or(1e-5),
                    n.t_max.unwrap_or(16.0),
                    n.t_count.unwrap_or(22),
                    "norm.t_min",
                )?;
                NormJob::Hlm { params, rgrid: self.radial()?, times }
            }
        })
    }

    fn corpus(&self, dim: usize, p: &MixedExponent, seed: Option<u64>) -> Result<Corpus> {
        let mut cfg = match &self.corpus {
            Some(c) => {
                if c.dim != dim {
                    return Err(Error::config("corpus.dim", format!("is {} but the job runs in dimension {dim}", c.dim)));
                }
                c.clone()
            }
            None => CorpusConfig::standard(dim, p),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        build_corpus(&cfg).map_err(at("corpus"))
    }

    /// Checks every field the job needs and resolves defaults.
    pub fn validate(&self, kind: JobKind, over: &Overrides) -> Result<Job> {
        if let Some(k) = self.kind {
            if k != kind {
                return Err(Error::config("kind", format!("config describes a {k} job but the {kind} command was used")));
            }
        }
        let seed = over.seed.or(self.seed);
        match kind {
            JobKind::Norm => {
                let dim = self.require_dim()?;
                let spec = self.require_function(dim)?;
                let norm = self.norm_job(dim)?;
                let m = self
                    .resolutions(over, || {
                        let pts = self.grid.as_ref().and_then(|g| g.points);
                        pts.map(|m| vec![m]).ok_or_else(|| missing("grid.points", "the grid size is required"))
                    })?;
                if m.len() != 1 {
                    return Err(Error::config("resolutions", "a norm job runs at a single resolution; use sweep for several"));
                }
                let grid = Grid::new(dim, self.half_width()?, m[0]).map_err(at("grid"))?;
                Ok(Job::Norm { function_id: self.function_id(), spec, grid, norm })
            }
            JobKind::Operator => {
                let dim = self.require_dim()?;
                let sec = self.operator.clone().ok_or_else(|| missing("operator", "the operator section is required"))?;
                let name = sec.name.ok_or_else(|| missing("operator.name", "one of M, H, H*, heat_sup, S"))?;
                let op: OperatorName = name.parse().map_err(at("operator.name"))?;
                if op == OperatorName::HardyDual && dim != 1 {
                    return Err(Error::config("operator.name", "H* is available in one dimension only"));
                }
                let norm = self.norm_job(dim)?;
                let space = norm
                    .space()
                    .ok_or_else(|| Error::config("norm.space", "operator norms use the mixed, lm or lm_lambda norm"))?;
                let p = match &norm {
                    NormJob::Mixed { p } => p.clone(),
                    NormJob::Lm { params, .. } | NormJob::LmLambda { params, .. } => params.p.clone(),
                    _ => unreachable!("space() accepted the norm"),
                };
                let corpus = self.corpus(dim, &p, seed)?;
                let heat_times = positive_times(
                    sec.t_min.unwrap_or(1e-5),
                    sec.t_max.unwrap_or(16.0),
                    sec.t_count.unwrap_or(22),
                    "operator.t_min",
                )?;
                let resolutions = self.resolutions(over, || Ok(default_resolutions(dim)))?;
                let options = OperatorOptions { half_width: self.half_width()?, heat_times };
                Ok(Job::Operator { op, space, corpus, resolutions, options })
            }
            JobKind::Decompose => {
                let dim = self.require_dim()?;
                let spec = self.require_function(dim)?;
                let section = self.decompose.clone().unwrap_or_default();
                if let Some([lo, hi]) = section.levels {
                    if lo > hi {
                        return Err(Error::config("decompose.levels", "empty level range"));
                    }
                }
                if section.degree.unwrap_or(1) > 3 {
                    return Err(Error::config("decompose.degree", "moment degrees above 3 are not supported"));
                }
                let m = self.resolutions(over, || {
                    let pts = self.grid.as_ref().and_then(|g| g.points);
                    pts.map(|m| vec![m]).ok_or_else(|| missing("grid.points", "the grid size is required"))
                })?;
                if m.len() != 1 {
                    return Err(Error::config("resolutions", "a decomposition runs at a single resolution"));
                }
                let grid = Grid::new(dim, self.half_width()?, m[0]).map_err(at("grid"))?;
                Ok(Job::Decompose { function_id: self.function_id(), spec, grid, section })
            }
            JobKind::Certify => {
                let sec = self.certify.clone().ok_or_else(|| missing("certify", "the certify section is required"))?;
                if sec.inequalities.is_empty() {
                    return Err(missing("certify.inequalities", &format!("list one or more of {}", REGISTRY.join(", "))));
                }
                let dim = match (self.grid_dim(), &self.corpus) {
                    (Some(_), _) => self.require_dim()?,
                    (None, Some(c)) => c.dim,
                    (None, None) => return Err(missing("grid.dim", "the corpus dimension is required")),
                };
                let mut params = sec.params.clone();
                if let Some(hw) = self.grid.as_ref().and_then(|g| g.half_width) {
                    params.half_width = hw;
                }
                if let Some(s) = seed {
                    params.seed = s;
                }
                let p = params.p_for(dim)?;
                for name in &sec.inequalities {
                    if !REGISTRY.contains(&name.as_str()) {
                        return Err(Error::config(
                            "certify.inequalities",
                            format!("`{name}` is not registered; known: {}", REGISTRY.join(", ")),
                        ));
                    }
                    let hyps = registry_hypotheses(name, &params, dim)?;
                    if !sec.allow_unmet_hypotheses {
                        if let Some(h) = hyps.iter().find(|h| !h.satisfied) {
                            return Err(Error::config(
                                "certify.params",
                                format!(
                                    "{name}: hypothesis `{}` fails ({}); set certify.allow_unmet_hypotheses = true to run without a verdict",
                                    h.name, h.detail
                                ),
                            ));
                        }
                    }
                }
                let corpus = self.corpus(dim, &p, seed)?;
                let resolutions = self.resolutions(over, || Ok(default_resolutions(dim)))?;
                Ok(Job::Certify { names: sec.inequalities, params, corpus, resolutions })
            }
            JobKind::Sweep => {
                let dim = self.require_dim()?;
                let spec = self.require_function(dim)?;
                let norm = self.norm_job(dim)?;
                let resolutions = self.resolutions(over, || Err(missing("resolutions", "a sweep needs two or more grid sizes")))?;
                if resolutions.len() < 2 {
                    return Err(Error::config("resolutions", "a sweep needs two or more grid sizes"));
                }
                Ok(Job::Sweep { function_id: self.function_id(), spec, dim, half_width: self.half_width()?, norm, resolutions })
            }
        }
    }
}
