use crate::error::{Error, Result};
use crate::mixed_lebesgue::{power_sum, MixedExponent};
use crate::sampled::{sample, FunctionSpec, Grid, SampledFunction, WeightedSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// Seed used when a configuration does not name one.
pub const DEFAULT_CORPUS_SEED: u64 = 20_240_917;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub spec: FunctionSpec,
}

/// Deterministic list of test functions for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub dim: usize,
    pub seed: u64,
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    /// Checks that the ids are unique and every spec is valid for the dimension.
    pub fn new(dim: usize, seed: u64, entries: Vec<CorpusEntry>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::param(format!("corpus dimension must be 1, 2 or 3, got {dim}")));
        }
        let mut seen = BTreeSet::new();
        for e in &entries {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::param(format!("duplicate corpus id `{}`", e.id)));
            }
            e.spec.validate()?;
        }
        Ok(Corpus { dim, seed, entries })
    }

    /// `count` copies of the zero function.
    pub fn zeros(dim: usize, count: usize) -> Result<Self> {
        let entries = (0..count)
            .map(|k| CorpusEntry {
                id: format!("zero_{k:02}"),
                spec: FunctionSpec::Polynomial { terms: Vec::new() },
            })
            .collect();
        Corpus::new(dim, 0, entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }

    /// The first `count` entries.
    pub fn truncated(&self, count: usize) -> Corpus {
        Corpus { dim: self.dim, seed: self.seed, entries: self.entries.iter().take(count).cloned().collect() }
    }

    /// Samples every entry on `grid`.
    pub fn sample(&self, grid: &Grid) -> Result<Vec<SampledFunction>> {
        if grid.dim() != self.dim {
            return Err(Error::GridMismatch(format!(
                "corpus is {}-dimensional, grid is {}-dimensional",
                self.dim,
                grid.dim()
            )));
        }
        self.entries.iter().map(|e| sample(&e.spec, grid)).collect()
    }
}

/// Recipe for [`build_corpus`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusConfig {
    pub dim: usize,
    pub seed: u64,
    /// Exponent whose power sum bounds the admissible power decay.
    pub p: Option<MixedExponent>,
    /// Half sides of origin-centered cube indicators.
    pub cube_half_sides: Vec<f64>,
    /// Off-center cube indicators as `[c, h]`: center `(c, ..., c)`, half side `h`.
    pub offset_cubes: Vec<[f64; 2]>,
    pub ball_radii: Vec<f64>,
    pub gaussian_scales: Vec<f64>,
    /// Decay exponents `a` of `max(|x|, cutoff)^(-a)`; each must stay below the power sum.
    pub power_exponents: Vec<f64>,
    pub power_cutoff: f64,
    /// Number of random `chi_Q - chi_Q'` pairs with congruent cubes.
    pub random_pairs: usize,
    /// Explicit extra entries appended verbatim.
    pub extra: Vec<CorpusEntry>,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig {
            dim: 1,
            seed: DEFAULT_CORPUS_SEED,
            p: None,
            cube_half_sides: Vec::new(),
            offset_cubes: Vec::new(),
            ball_radii: Vec::new(),
            gaussian_scales: Vec::new(),
            power_exponents: Vec::new(),
            power_cutoff: 1.0 / 16.0,
            random_pairs: 0,
            extra: Vec::new(),
        }
    }
}

impl CorpusConfig {
    /// The default thirty-entry recipe for dimension `dim` and exponent `p`.
    pub fn standard(dim: usize, p: &MixedExponent) -> Self {
        let big_p = power_sum(p);
        CorpusConfig {
            dim,
            seed: DEFAULT_CORPUS_SEED,
            p: Some(p.clone()),
            cube_half_sides: vec![0.25, 0.5, 1.0, 2.0],
            offset_cubes: vec![[0.5, 0.25], [-1.0, 0.5]],
            ball_radii: vec![0.5, 1.0, 2.0],
            gaussian_scales: vec![0.25, 0.5, 1.0, 2.0],
            power_exponents: [0.25, 0.5, 0.75].iter().map(|c| c * big_p).collect(),
            power_cutoff: 1.0 / 16.0,
            random_pairs: 14,
            extra: Vec::new(),
        }
    }
}

fn fmt_num(v: f64) -> String {
    let s = format!("{v}");
    s.replace('-', "m")
}

/// Builds the deterministic corpus described by `config`.
pub fn build_corpus(config: &CorpusConfig) -> Result<Corpus> {
    let dim = config.dim;
    if !(1..=3).contains(&dim) {
        return Err(Error::config("corpus.dim", format!("must be 1, 2 or 3, got {dim}")));
    }
    let p = match &config.p {
        Some(p) => {
            if p.len() != dim {
                return Err(Error::config("corpus.p", "length must equal the dimension"));
            }
            p.clone()
        }
        None => MixedExponent::uniform(2.0, dim)?,
    };
    let big_p = power_sum(&p);
    let mut entries = Vec::new();
    for &h in &config.cube_half_sides {
        entries.push(CorpusEntry { id: format!("cube_h{}", fmt_num(h)), spec: FunctionSpec::centered_cube(dim, h) });
    }
    for &[c, h] in &config.offset_cubes {
        entries.push(CorpusEntry {
            id: format!("cube_c{}_h{}", fmt_num(c), fmt_num(h)),
            spec: FunctionSpec::cube(&vec![c; dim], h),
        });
    }
    for &r in &config.ball_radii {
        entries.push(CorpusEntry { id: format!("ball_r{}", fmt_num(r)), spec: FunctionSpec::BallIndicator { radius: r } });
    }
    for &s in &config.gaussian_scales {
        entries.push(CorpusEntry { id: format!("gauss_s{}", fmt_num(s)), spec: FunctionSpec::Gaussian { scale: s } });
    }
    for &a in &config.power_exponents {
        if !(a > 0.0 && a < big_p) {
            return Err(Error::config(
                "corpus.power_exponents",
                format!("decay exponent {a} must lie in (0, {big_p}) for local integrability"),
            ));
        }
        entries.push(CorpusEntry {
            id: format!("power_a{}", fmt_num((a * 1e6).round() / 1e6)),
            spec: FunctionSpec::Power { exponent: a, cutoff: config.power_cutoff },
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for k in 0..config.random_pairs {
        let h: f64 = rng.gen_range(0.125..0.75);
        let c: Vec<f64> = (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let shift: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let c2: Vec<f64> = c.iter().zip(&shift).map(|(a, s)| a + s).collect();
        entries.push(CorpusEntry {
            id: format!("pair_{k:02}"),
            spec: FunctionSpec::Combination {
                terms: vec![
                    WeightedSpec { weight: 1.0, spec: FunctionSpec::cube(&c, h) },
                    WeightedSpec { weight: -1.0, spec: FunctionSpec::cube(&c2, h) },
                ],
            },
        });
    }
    entries.extend(config.extra.iter().cloned());
    if entries.is_empty() {
        return Err(Error::config("corpus", "configuration produces no entries"));
    }
    Corpus::new(dim, config.seed, entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_corpus_has_thirty_unique_entries() {
        for dim in 1..=3 {
            let p = MixedExponent::uniform(2.0, dim).unwrap();
            let c = build_corpus(&CorpusConfig::standard(dim, &p)).unwrap();
            assert_eq!(c.len(), 30);
            let ids: BTreeSet<_> = c.ids().into_iter().collect();
            assert_eq!(ids.len(), 30);
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let p = MixedExponent::uniform(2.0, 2).unwrap();
        let cfg = CorpusConfig::standard(2, &p);
        assert_eq!(build_corpus(&cfg).unwrap(), build_corpus(&cfg).unwrap());
        let mut other = cfg.clone();
        other.seed += 1;
        assert_ne!(build_corpus(&cfg).unwrap(), build_corpus(&other).unwrap());
    }

    #[test]
    fn rejects_empty_and_non_integrable() {
        assert!(build_corpus(&CorpusConfig::default()).is_err());
        let cfg = CorpusConfig { power_exponents: vec![0.5], ..CorpusConfig::default() };
        assert!(matches!(build_corpus(&cfg), Err(Error::Config { .. })));
        let cfg = CorpusConfig { power_exponents: vec![0.49], ..CorpusConfig::default() };
        assert_eq!(build_corpus(&cfg).unwrap().len(), 1);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let e = CorpusEntry { id: "a".into(), spec: FunctionSpec::Gaussian { scale: 1.0 } };
        assert!(Corpus::new(1, 0, vec![e.clone(), e]).is_err());
    }

    #[test]
    fn random_pairs_have_zero_mean() {
        let g = Grid::new(1, 4.0, 513).unwrap();
        let cfg = CorpusConfig { random_pairs: 5, ..CorpusConfig::default() };
        let c = build_corpus(&cfg).unwrap();
        for f in c.sample(&g).unwrap() {
            let total: f64 = f.values().iter().sum::<f64>() * g.spacing();
            assert!(total.abs() <= 2.0 * g.spacing() + 1e-12, "{total}");
        }
    }
}
