use super::corpus::Corpus;
use super::hardy_check::{hardy_dual_weighted_check, standard_radial_corpus};
use super::report::{relative_change, Assembly, AuxCheck, Bracket, CertifyParams, HypothesisCheck, InequalityReport};
use crate::decomposition::{atomic_decompose, atomic_synthesize, eq12_weight_check, make_block, Atom, BlockSum};
use crate::error::{Error, Result};
use crate::mixed_lebesgue::{dual_exponent, integral_of_product, mixed_norm, power_sum, MixedExponent, Shape};
use crate::morrey_herz::{
    herz_norm, lm_dyadic_norm, lm_lambda_norm, lm_norm, omega_check, MorreyParams, RadialGrid,
    RadialWeight,
};
use crate::operators::{heat_sup, hardy_nd, hl_maximal, lu_aggregate, spherical_mean, vector_maximal};
use crate::sampled::{Grid, SampledFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Names accepted by [`certify_inequality`].
pub const REGISTRY: [&str; 14] =
    ["eq2", "eq3", "eq4", "eq5", "eq6", "eq7", "eq11", "eq13", "eq79", "thm41i", "thm71", "lem31", "lem81", "thm81"];

/// Number of functions in the sequences used by vector-valued entries.
const SEQUENCE_LEN: usize = 3;

/// Default pair of resolutions per dimension.
pub fn default_resolutions(dim: usize) -> Vec<usize> {
    match dim {
        1 => vec![257, 513],
        2 => vec![65, 129],
        _ => vec![17, 33],
    }
}

/// Resolved parameters shared by the per-entry evaluations.
struct Ctx {
    name: &'static str,
    dim: usize,
    params: CertifyParams,
    p: MixedExponent,
    w: RadialWeight,
    rgrid: RadialGrid,
}

impl Ctx {
    fn weighted(&self, f: &SampledFunction) -> Result<f64> {
        Ok(lm_norm(f, &MorreyParams::weighted(self.p.clone(), self.params.theta, self.w.clone()), &self.rgrid)?.value)
    }

    fn lambda_norm(&self, f: &SampledFunction, shape: Shape) -> Result<f64> {
        let params = MorreyParams::lambda(self.p.clone(), self.params.theta, self.params.lambda).with_shape(shape);
        Ok(lm_lambda_norm(f, &params, &self.rgrid)?.value)
    }

    fn sequence(&self, fs: &[SampledFunction], i: usize) -> Vec<SampledFunction> {
        (0..SEQUENCE_LEN.min(fs.len())).map(|k| fs[(i + k) % fs.len()].clone()).collect()
    }

    fn lemma81_constants(&self) -> (f64, f64) {
        let l = self.params.lambda;
        let base = std::f64::consts::LN_2.powf(1.0 / self.params.theta);
        ((-l).exp2() * base, l.exp2() * base)
    }
}

fn check(name: &str, satisfied: bool, detail: impl Into<String>) -> HypothesisCheck {
    HypothesisCheck { name: name.into(), satisfied, detail: detail.into() }
}

fn p_open(ctx: &Ctx) -> HypothesisCheck {
    let ok = ctx.p.entries().iter().all(|q| *q > 1.0 && q.is_finite());
    check("1 < p_i < inf", ok, format!("p = {:?}", ctx.p.entries()))
}

fn theta_range(ctx: &Ctx, lo: f64, lo_strict: bool, allow_inf: bool) -> HypothesisCheck {
    let t = ctx.params.theta;
    let above = if lo_strict { t > lo } else { t >= lo };
    let ok = above && (allow_inf || t.is_finite());
    let name = format!("{lo} {} theta {}", if lo_strict { "<" } else { "<=" }, if allow_inf { "<= inf" } else { "< inf" });
    check(&name, ok, format!("theta = {t}"))
}

fn v_range(ctx: &Ctx, allow_one: bool, allow_inf: bool) -> HypothesisCheck {
    let v = ctx.params.v;
    let ok = (if allow_one { v >= 1.0 } else { v > 1.0 }) && (allow_inf || v.is_finite());
    check("aggregation exponent range", ok, format!("v = {v}"))
}

fn lambda_range(ctx: &Ctx, strict_zero: bool) -> HypothesisCheck {
    let l = ctx.params.lambda;
    let big_p = power_sum(&ctx.p);
    let ok = (if strict_zero { l > 0.0 } else { l >= 0.0 }) && l < big_p;
    let name = if strict_zero { "0 < lambda < sum 1/p_i" } else { "0 <= lambda < sum 1/p_i" };
    check(name, ok, format!("lambda = {l}, sum 1/p_i = {big_p}"))
}

fn omega(ctx: &Ctx, with_p: bool) -> Result<HypothesisCheck> {
    let rep = omega_check(&ctx.w, ctx.params.theta, &ctx.p)?;
    let ok = if with_p { rep.in_omega_p_theta } else { rep.in_omega_theta };
    let name = if with_p { "w in Omega_{p,theta}" } else { "w in Omega_theta" };
    Ok(check(name, ok, format!("verdict {:?}", rep.verdict)))
}

fn doubling(ctx: &Ctx) -> Result<HypothesisCheck> {
    let nodes = ctx.rgrid.nodes();
    let ppo = ctx.rgrid.points_per_octave();
    let wv = ctx.w.eval_many(nodes)?;
    let mut worst = 1.0f64;
    for k in 0..nodes.len().saturating_sub(ppo) {
        let (a, b) = (wv[k], wv[k + ppo]);
        if a <= 0.0 || b <= 0.0 {
            worst = f64::INFINITY;
            break;
        }
        worst = worst.max(a / b).max(b / a);
    }
    Ok(check("w doubling", worst.is_finite(), format!("max w(2r)/w(r) ratio {worst:.6}")))
}

fn hardy_dual_hypothesis(ctx: &Ctx) -> Result<HypothesisCheck> {
    let probes = standard_radial_corpus(&ctx.rgrid);
    let rep = hardy_dual_weighted_check(&ctx.w, ctx.params.theta, &ctx.p, &ctx.rgrid, &probes)?;
    Ok(check(
        "H* bounded between hat-weighted spaces",
        rep.satisfied,
        format!(
            "estimate {:.6e}, one-octave extension {:.6e}, relative change {:.3e}",
            rep.estimate, rep.extended_estimate, rep.relative_change
        ),
    ))
}

fn eq12_hypothesis(ctx: &Ctx) -> Result<HypothesisCheck> {
    let s = ctx.params.s_for(ctx.dim)?;
    Ok(match eq12_weight_check(&ctx.w, &ctx.p, &s, &ctx.rgrid) {
        Ok(rep) => check(
            "weight integrability condition for s",
            rep.holds,
            format!("sup ratio {:.6e}, relative change {:.3e}", rep.sup_ratio, rep.relative_change),
        ),
        Err(e) => check("weight integrability condition for s", false, e.to_string()),
    })
}

fn hypotheses(ctx: &Ctx) -> Result<Vec<HypothesisCheck>> {
    let h = match ctx.name {
        "eq2" | "eq4" | "eq11" => {
            vec![p_open(ctx), theta_range(ctx, 1.0, true, true), omega(ctx, false)?, hardy_dual_hypothesis(ctx)?]
        }
        "eq3" => vec![
            p_open(ctx),
            theta_range(ctx, 1.0, true, true),
            v_range(ctx, false, false),
            omega(ctx, false)?,
            hardy_dual_hypothesis(ctx)?,
        ],
        "eq5" | "eq6" | "eq7" => {
            vec![p_open(ctx), theta_range(ctx, 0.0, true, true), v_range(ctx, false, false), lambda_range(ctx, false)]
        }
        "eq13" => vec![
            p_open(ctx),
            theta_range(ctx, 1.0, true, true),
            omega(ctx, true)?,
            doubling(ctx)?,
            eq12_hypothesis(ctx)?,
        ],
        "eq79" => vec![
            p_open(ctx),
            theta_range(ctx, 1.0, true, true),
            v_range(ctx, true, true),
            omega(ctx, true)?,
            doubling(ctx)?,
        ],
        "thm41i" => vec![p_open(ctx), theta_range(ctx, 1.0, true, true), omega(ctx, false)?, doubling(ctx)?],
        "thm71" => vec![p_open(ctx), theta_range(ctx, 1.0, false, true), omega(ctx, true)?],
        "lem31" => vec![p_open(ctx), v_range(ctx, false, true)],
        "lem81" => {
            let ok = ctx.p.entries().iter().all(|q| *q > 1.0);
            vec![
                check("1 < p_i <= inf", ok, format!("p = {:?}", ctx.p.entries())),
                theta_range(ctx, 1.0, false, false),
                lambda_range(ctx, true),
            ]
        }
        "thm81" => vec![p_open(ctx), theta_range(ctx, 1.0, false, true), lambda_range(ctx, true)],
        other => return Err(Error::param(format!("`{other}` is not a registered inequality"))),
    };
    Ok(h)
}

/// Hypotheses of `name` for `params` in dimension `dim`, without touching any corpus.
pub fn registry_hypotheses(name: &str, params: &CertifyParams, dim: usize) -> Result<Vec<HypothesisCheck>> {
    hypotheses(&context(name, params, dim)?)
}

fn context(name: &str, params: &CertifyParams, dim: usize) -> Result<Ctx> {
    let name = REGISTRY
        .iter()
        .copied()
        .find(|n| *n == name)
        .ok_or_else(|| Error::param(format!("`{name}` is not a registered inequality; known: {}", REGISTRY.join(", "))))?;
    if !(1..=3).contains(&dim) {
        return Err(Error::param(format!("dimension must be 1, 2 or 3, got {dim}")));
    }
    let p = params.p_for(dim)?;
    if !(params.theta > 0.0) {
        return Err(Error::config("params.theta", "must be positive"));
    }
    if !(params.lambda.is_finite() && params.lambda >= 0.0) {
        return Err(Error::config("params.lambda", "must be finite and nonnegative"));
    }
    if !(params.v >= 1.0) {
        return Err(Error::config("params.v", "must be at least 1"));
    }
    let w = params.weight_or_default();
    w.validate()?;
    let rgrid = params.radial_grid()?;
    Ok(Ctx { name, dim, params: params.clone(), p, w, rgrid })
}

/// Per-resolution output of one registry entry.
#[derive(Default)]
struct Level {
    rows: Vec<(String, f64, f64)>,
    aux: Vec<(String, f64)>,
}

fn pairs(ids: &[String], vals: Vec<(f64, f64)>) -> Vec<(String, f64, f64)> {
    ids.iter().cloned().zip(vals).map(|(id, (l, r))| (id, l, r)).collect()
}

fn max_of(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0f64, f64::max)
}

/// `(sum_j (lambda_j chi_{Q_j})^v)^(1/v)` on the grid nodes.
fn cube_aggregate(grid: &Grid, atoms: &[Atom], v: f64) -> SampledFunction {
    let dim = grid.dim();
    let mut out = vec![0.0f64; grid.len()];
    for i in 0..grid.len() {
        let x = grid.position(i);
        let mut acc = 0.0f64;
        for a in atoms.iter().filter(|a| a.cube.contains(&x[..dim])) {
            if v.is_infinite() {
                acc = acc.max(a.lambda);
            } else {
                acc += a.lambda.powf(v);
            }
        }
        out[i] = if v.is_infinite() { acc } else { acc.powf(1.0 / v) };
    }
    SampledFunction::from_values(*grid, out).expect("finite aggregate")
}

fn evaluate(ctx: &Ctx, grid: &Grid, ids: &[String], fs: &[SampledFunction]) -> Result<Level> {
    let n = fs.len();
    let v = ctx.params.v;
    let idx: Vec<usize> = (0..n).collect();
    let mut level = Level::default();
    match ctx.name {
        "eq2" => {
            let vals = idx
                .par_iter()
                .map(|&i| Ok((ctx.weighted(&hl_maximal(&fs[i]))?, ctx.weighted(&fs[i])?)))
                .collect::<Result<Vec<_>>>()?;
            level.rows = pairs(ids, vals);
        }
        "eq3" => {
            let vals = idx
                .par_iter()
                .map(|&i| {
                    let seq = ctx.sequence(fs, i);
                    let row = (ctx.weighted(&vector_maximal(&seq, v)?)?, ctx.weighted(&lu_aggregate(&seq, v)?)?);
                    let single = std::slice::from_ref(&fs[i]);
                    let reduced = (ctx.weighted(&vector_maximal(single, v)?)?, ctx.weighted(&lu_aggregate(single, v)?)?);
                    let direct = (ctx.weighted(&hl_maximal(&fs[i]))?, ctx.weighted(&fs[i])?);
                    let mismatch = (reduced.0 - direct.0).abs().max((reduced.1 - direct.1).abs());
                    Ok((row, mismatch))
                })
                .collect::<Result<Vec<_>>>()?;
            level.aux.push(("single_function_reduction".into(), max_of(vals.iter().map(|x| x.1))));
            level.rows = pairs(ids, vals.into_iter().map(|x| x.0).collect());
        }
        "eq4" => {
            let vals = idx
                .par_iter()
                .map(|&i| {
                    let sup = lu_aggregate(&ctx.sequence(fs, i), f64::INFINITY)?;
                    Ok((ctx.weighted(&hl_maximal(&sup))?, ctx.weighted(&sup)?))
                })
                .collect::<Result<Vec<_>>>()?;
            level.rows = pairs(ids, vals);
        }
        "eq5" | "eq6" | "eq7" => {
            let cut = (5.0 * ctx.params.split_radius).min(grid.half_width());
            let vals = idx
                .par_iter()
                .map(|&i| {
                    let seq = ctx.sequence(fs, i);
                    let local: Vec<SampledFunction> = seq.iter().map(|f| f.restrict(cut)).collect::<Result<_>>()?;
                    let global: Vec<SampledFunction> =
                        seq.iter().zip(&local).map(|(f, l)| f.sub(l)).collect::<Result<_>>()?;
                    let rhs = ctx.lambda_norm(&lu_aggregate(&seq, v)?, Shape::Cube)?;
                    let full = ctx.lambda_norm(&vector_maximal(&seq, v)?, Shape::Cube)?;
                    let loc = ctx.lambda_norm(&vector_maximal(&local, v)?, Shape::Cube)?;
                    let glo = ctx.lambda_norm(&vector_maximal(&global, v)?, Shape::Cube)?;
                    Ok((full, loc, glo, rhs))
                })
                .collect::<Result<Vec<_>>>()?;
            // Sublinearity of M over the split: the larger part carries at least half the full norm.
            let worst = vals
                .iter()
                .map(|(full, loc, glo, _)| if *full > 0.0 { loc.max(*glo) / full } else { 1.0 })
                .fold(f64::INFINITY, f64::min);
            level.aux.push(("split_consistency".into(), worst));
            level.rows = pairs(
                ids,
                vals.into_iter()
                    .map(|(full, loc, glo, rhs)| match ctx.name {
                        "eq5" => (full, rhs),
                        "eq6" => (loc, rhs),
                        _ => (glo, rhs),
                    })
                    .collect(),
            );
        }
        "eq11" => {
            let times = ctx.params.heat_times()?;
            let vals = idx
                .par_iter()
                .map(|&i| {
                    let sup = heat_sup(&fs[i], &times)?;
                    Ok((ctx.weighted(&fs[i])?, ctx.weighted(&sup.function)?, sup.sub_resolution))
                })
                .collect::<Result<Vec<_>>>()?;
            let upper = max_of(vals.iter().filter(|x| x.0 > 0.0).map(|x| x.1 / x.0));
            level.aux.push(("upper_constant".into(), upper));
            level.aux.push(("sub_resolution_times".into(), f64::from(vals.iter().any(|x| x.2))));
            level.rows = pairs(ids, vals.into_iter().map(|x| (x.0, x.1)).collect());
        }
        "eq13" | "eq79" => {
            let [j_min, j_max] = ctx.params.atom_levels;
            let vals = idx
                .par_iter()
                .map(|&i| {
                    let dec = atomic_decompose(&fs[i], ctx.params.degree, j_min, j_max)?;
                    let out = if ctx.name == "eq13" {
                        let synth = atomic_synthesize(&dec);
                        (ctx.weighted(&synth)?, ctx.weighted(&cube_aggregate(grid, &dec.atoms, 1.0))?)
                    } else {
                        (ctx.weighted(&cube_aggregate(grid, &dec.atoms, v))?, ctx.weighted(&fs[i])?)
                    };
                    let worst_moment = max_of(dec.atoms.iter().map(|a| a.moment_residual / a.cube.volume()));
                    Ok((out, dec.residual, worst_moment, dec.c0))
                })
                .collect::<Result<Vec<_>>>()?;
            level.aux.push(("synthesis_residual".into(), max_of(vals.iter().map(|x| x.1))));
            level.aux.push(("atom_moment_residual".into(), max_of(vals.iter().map(|x| x.2))));
            level.aux.push(("atom_constant".into(), max_of(vals.iter().map(|x| x.3))));
            level.rows = pairs(ids, vals.into_iter().map(|x| x.0).collect());
        }
        "thm41i" => {
            let p_dual = dual_exponent(&ctx.p)?;
            let [b_lo, b_hi] = ctx.params.block_levels;
            if b_lo > b_hi {
                return Err(Error::config("params.block_levels", "empty range"));
            }
            let per = ctx.params.block_sums_per_entry;
            let vals = idx
                .par_iter()
                .map(|&i| -> Result<Vec<(String, f64, f64, f64)>> {
                    let f = &fs[i];
                    let nf = ctx.weighted(f)?;
                    let abs_f = f.abs();
                    let mut out = Vec::new();
                    for k in 0..per {
                        let mut rng = ChaCha8Rng::seed_from_u64(ctx.params.seed ^ ((i as u64) << 16) ^ k as u64);
                        let terms_wanted = rng.gen_range(1..=3usize);
                        let mut terms = Vec::new();
                        let mut radii = Vec::new();
                        for _ in 0..terms_wanted {
                            let j = rng.gen_range(b_lo..=b_hi);
                            // Even-numbered sums reuse f itself, which aligns the blocks with f.
                            let source = if k % 2 == 0 { f } else { &fs[rng.gen_range(0..n)] };
                            let rho: f64 = if k % 2 == 0 { rng.gen_range(0.1..1.0) } else { rng.gen_range(-1.0..1.0) };
                            if let Ok(b) = make_block(source, (j as f64).exp2(), &p_dual, &ctx.w) {
                                radii.push(b.radius);
                                terms.push((rho, b));
                            }
                        }
                        if terms.is_empty() {
                            continue;
                        }
                        let sum = BlockSum::new(terms, ctx.params.theta)?;
                        let g = sum.function(*grid)?;
                        let lhs = integral_of_product(&abs_f, &g.abs())?;
                        // Termwise Hoelder bound with the discrete sum of w(R_j) ||f||_{Q(R_j)}.
                        let mut discrete = Vec::new();
                        for r in &radii {
                            let local = f.restrict(r.min(grid.half_width()))?;
                            discrete.push(ctx.w.eval(*r)? * mixed_norm(&local, &ctx.p, None)?);
                        }
                        let holder = sum
                            .terms
                            .iter()
                            .zip(&discrete)
                            .map(|((rho, _), d)| rho.abs() * d)
                            .sum::<f64>();
                        out.push((format!("{}#{k}", ids[i]), lhs, nf * sum.coefficient_norm, if holder > 0.0 { lhs / holder } else { 0.0 }));
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()?;
            let flat: Vec<_> = vals.into_iter().flatten().collect();
            level.aux.push(("termwise_holder_ratio".into(), max_of(flat.iter().map(|x| x.3))));
            level.rows = flat.into_iter().map(|(id, l, r, _)| (id, l, r)).collect();
        }
        "thm71" => {
            let vals = idx
                .par_iter()
                .map(|&i| {
                    let h = hardy_nd(&fs[i]);
                    let hs = hardy_nd(&spherical_mean(&fs[i]).function);
                    let dev = inscribed_deviation(&h, &hs);
                    Ok(((ctx.weighted(&h)?, ctx.weighted(&fs[i])?), dev))
                })
                .collect::<Result<Vec<_>>>()?;
            level.aux.push(("hardy_spherical_identity".into(), max_of(vals.iter().map(|x| x.1))));
            level.rows = pairs(ids, vals.into_iter().map(|x| x.0).collect());
        }
        "lem31" => {
            let vals = idx
                .par_iter()
                .map(|&i| {
                    let seq = ctx.sequence(fs, i);
                    Ok((
                        mixed_norm(&vector_maximal(&seq, v)?, &ctx.p, None)?,
                        mixed_norm(&lu_aggregate(&seq, v)?, &ctx.p, None)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            level.rows = pairs(ids, vals);
        }
        "lem81" | "thm81" => {
            let (j_min, j_max) = (ctx.rgrid.j_min(), ctx.rgrid.j_max() - 1);
            let params = MorreyParams::lambda(ctx.p.clone(), ctx.params.theta, ctx.params.lambda).with_shape(Shape::Ball);
            let vals = idx
                .par_iter()
                .map(|&i| {
                    let cont = lm_lambda_norm(&fs[i], &params, &ctx.rgrid)?.value;
                    let disc = if ctx.name == "lem81" {
                        lm_dyadic_norm(&fs[i], &params, j_min, j_max)?
                    } else {
                        herz_norm(&fs[i], -ctx.params.lambda, ctx.params.theta, &ctx.p, j_min, j_max)?
                    };
                    Ok((cont, disc))
                })
                .collect::<Result<Vec<_>>>()?;
            level.rows = pairs(ids, vals);
        }
        _ => unreachable!("name resolved against the registry"),
    }
    Ok(level)
}

fn bracket(ctx: &Ctx) -> Option<Bracket> {
    let eps = ctx.params.epsilon;
    match ctx.name {
        "eq11" => Some(Bracket { lower: None, upper: Some(1.0 + ctx.params.heat_slack) }),
        "thm41i" => Some(Bracket { lower: None, upper: Some(1.0 + eps) }),
        "lem81" => {
            let (lo, hi) = ctx.lemma81_constants();
            Some(Bracket { lower: Some((1.0 - eps) * lo), upper: Some((1.0 + eps) * hi) })
        }
        "thm81" => {
            let (lo, hi) = ctx.lemma81_constants();
            let geometric = 1.0 / (1.0 - (-ctx.params.lambda).exp2());
            Some(Bracket { lower: Some((1.0 - eps) * lo), upper: Some((1.0 + eps) * hi * geometric) })
        }
        _ => None,
    }
}

fn notes(ctx: &Ctx) -> Vec<String> {
    let mut out = Vec::new();
    match ctx.name {
        "eq3" | "eq4" | "eq5" | "eq6" | "eq7" | "lem31" => out.push(format!(
            "row id names the first of {SEQUENCE_LEN} consecutive corpus entries (cyclic) forming the sequence"
        )),
        "eq11" => out.push("lhs is the weighted norm of f, rhs that of the heat maximal function".into()),
        "eq13" => out.push("lhs is the norm of the synthesized sum, rhs that of sum lambda_j chi_{Q_j}".into()),
        "thm41i" => out.push("lhs is integral |f g|, rhs is ||f|| times the coefficient norm of the block sum".into()),
        "lem81" => out.push("ratio is the continuous ball norm over the dyadic series".into()),
        "thm81" => out.push("ratio is the continuous ball norm over the Herz norm with alpha = -lambda".into()),
        _ => {}
    }
    if matches!(ctx.name, "eq6" | "eq7") {
        out.push(format!("split at Q(5r) with r = {}", ctx.params.split_radius));
    }
    out
}

fn aux_checks(ctx: &Ctx, resolutions: &[usize], levels: &[Level], rows_at: impl Fn(usize) -> Vec<f64>) -> Vec<AuxCheck> {
    let series = |name: &str| -> Vec<f64> {
        levels.iter().map(|l| l.aux.iter().find(|a| a.0 == name).map_or(f64::NAN, |a| a.1)).collect()
    };
    let detail = |vals: &[f64]| {
        resolutions.iter().zip(vals).map(|(m, v)| format!("m={m}: {v:.6e}")).collect::<Vec<_>>().join(", ")
    };
    let mut out = Vec::new();
    match ctx.name {
        "eq3" => {
            let s = series("single_function_reduction");
            out.push(AuxCheck {
                name: "single_function_reduction".into(),
                passed: s.iter().all(|v| *v == 0.0),
                value: max_of(s.iter().copied()),
                detail: "largest difference from the scalar maximal row".into(),
            });
        }
        "eq5" | "eq6" | "eq7" => {
            let s = series("split_consistency");
            let worst = s.iter().copied().fold(f64::INFINITY, f64::min);
            out.push(AuxCheck {
                name: "split_consistency".into(),
                passed: worst >= 0.5,
                value: worst,
                detail: "smallest max(local, global) / full over the corpus".into(),
            });
        }
        "eq11" => {
            let s = series("upper_constant");
            let drift = if s.len() >= 2 { relative_change(s[s.len() - 2], s[s.len() - 1]) } else { 0.0 };
            out.push(AuxCheck {
                name: "upper_constant".into(),
                passed: s.iter().all(|v| v.is_finite()) && drift < ctx.params.drift_threshold,
                value: *s.last().unwrap_or(&f64::NAN),
                detail: format!("{}; drift {drift:.3e}", detail(&s)),
            });
            let sub = series("sub_resolution_times");
            out.push(AuxCheck {
                name: "sub_resolution_times".into(),
                passed: true,
                value: max_of(sub.iter().copied()),
                detail: "1 when some heat time has sqrt(t) below the grid spacing".into(),
            });
        }
        "eq13" | "eq79" => {
            let r = series("synthesis_residual");
            out.push(AuxCheck {
                name: "synthesis_residual".into(),
                passed: r.iter().all(|v| v.is_finite()),
                value: *r.last().unwrap_or(&f64::NAN),
                detail: detail(&r),
            });
            let mres = series("atom_moment_residual");
            out.push(AuxCheck {
                name: "atom_moment_residual".into(),
                passed: mres.iter().all(|v| *v <= 1e-8),
                value: max_of(mres.iter().copied()),
                detail: "largest moment residual per unit cube volume".into(),
            });
            let c0 = series("atom_constant");
            out.push(AuxCheck {
                name: "atom_constant".into(),
                passed: c0.iter().all(|v| v.is_finite()),
                value: *c0.last().unwrap_or(&f64::NAN),
                detail: detail(&c0),
            });
            if ctx.name == "eq79" {
                let finest = rows_at(resolutions.len() - 1);
                let half = finest.len().div_ceil(2);
                let a = max_of(finest[..half].iter().copied());
                let b = max_of(finest.iter().copied());
                let change = relative_change(a, b);
                out.push(AuxCheck {
                    name: "corpus_doubling".into(),
                    passed: change < ctx.params.drift_threshold,
                    value: change,
                    detail: format!("max ratio over half the corpus {a:.6e}, full corpus {b:.6e}"),
                });
            }
        }
        "thm41i" => {
            let s = series("termwise_holder_ratio");
            out.push(AuxCheck {
                name: "termwise_holder_ratio".into(),
                passed: s.iter().all(|v| *v <= 1.0 + 1e-9),
                value: max_of(s.iter().copied()),
                detail: "integral |f g| over sum |rho_j| w(R_j) ||f||_{L_p(Q(R_j))}".into(),
            });
        }
        "thm71" => {
            let s = series("hardy_spherical_identity");
            let tol = if ctx.dim == 1 { 1e-12 } else { 0.05 };
            out.push(AuxCheck {
                name: "hardy_spherical_identity".into(),
                passed: s.iter().all(|v| *v <= tol),
                value: max_of(s.iter().copied()),
                detail: format!("largest relative sup deviation of H f from H S f; tolerance {tol:e}"),
            });
        }
        _ => {}
    }
    out
}

/// Largest `|a - b|` over nodes of the inscribed ball, where every rotation
/// of a node stays on the grid, relative to `max |a|`.
fn inscribed_deviation(a: &SampledFunction, b: &SampledFunction) -> f64 {
    let grid = a.grid();
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    (0..grid.len())
        .filter(|&i| grid.radius(i) <= grid.half_width())
        .map(|i| (a.values()[i] - b.values()[i]).abs())
        .fold(0.0, f64::max)
        / scale
}

/// Evaluates the inequality `name` over `corpus` at each resolution.
///
/// Hypotheses are checked first; when one fails the values are still
/// computed and the verdict is withheld.
pub fn certify_inequality(
    name: &str,
    params: &CertifyParams,
    corpus: &Corpus,
    resolutions: &[usize],
) -> Result<InequalityReport> {
    let ctx = context(name, params, corpus.dim)?;
    if resolutions.is_empty() {
        return Err(Error::param("at least one resolution is required"));
    }
    if corpus.is_empty() {
        return Err(Error::param("corpus is empty"));
    }
    let hyps = hypotheses(&ctx)?;
    let ids: Vec<String> = corpus.entries.iter().map(|e| e.id.clone()).collect();
    let levels: Vec<Level> = resolutions
        .par_iter()
        .map(|&m| {
            let grid = Grid::new(corpus.dim, params.half_width, m)?;
            let fs = corpus.sample(&grid)?;
            evaluate(&ctx, &grid, &ids, &fs)
        })
        .collect::<Result<_>>()?;
    let rows_at = |k: usize| -> Vec<f64> {
        levels[k].rows.iter().filter(|r| r.2 > 0.0).map(|r| r.1 / r.2).collect()
    };
    let checks = aux_checks(&ctx, resolutions, &levels, rows_at);
    let raw = resolutions
        .iter()
        .zip(levels)
        .flat_map(|(m, l)| l.rows.into_iter().map(move |(id, lhs, rhs)| (id, *m, lhs, rhs)))
        .collect();
    Ok(Assembly {
        name: ctx.name.to_string(),
        dim: ctx.dim,
        bracket: bracket(&ctx),
        notes: notes(&ctx),
        params: ctx.params,
        resolutions: resolutions.to_vec(),
        hypotheses: hyps,
        raw,
        checks,
    }
    .finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certify::corpus::{build_corpus, CorpusConfig, CorpusEntry};
    use crate::certify::report::Verdict;
    use crate::morrey_herz::RadialGridSpec;
    use crate::sampled::FunctionSpec;

    fn unit_cube_corpus() -> Corpus {
        let entry = CorpusEntry { id: "unit_cube".into(), spec: FunctionSpec::centered_cube(1, 1.0) };
        Corpus::new(1, 0, vec![entry]).unwrap()
    }

    fn standard_1d(count: usize) -> Corpus {
        let p = MixedExponent::uniform(2.0, 1).unwrap();
        build_corpus(&CorpusConfig::standard(1, &p)).unwrap().truncated(count)
    }

    #[test]
    fn lemma81_unit_cube_example() {
        let params = CertifyParams {
            rgrid: RadialGridSpec { j_min: -20, j_max: 20, points_per_octave: 32 },
            ..CertifyParams::default()
        };
        let rep = certify_inequality("lem81", &params, &unit_cube_corpus(), &[513]).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let ratio = rep.rows[0].ratio.unwrap();
        assert!((ratio - 0.8284).abs() < 0.01 * 0.8284, "{ratio}");
        let b = rep.bracket.unwrap();
        assert!((b.lower.unwrap() - 0.95 * 0.7001).abs() < 1e-3);
        assert!((b.upper.unwrap() - 1.05 * 0.9902).abs() < 1e-3);
    }

    #[test]
    fn zero_corpus_is_vacuous() {
        let rep = certify_inequality("eq2", &CertifyParams::default(), &Corpus::zeros(1, 4).unwrap(), &[65]).unwrap();
        assert_eq!(rep.verdict, Verdict::VacuousPass);
        assert!(rep.rows.is_empty());
        assert_eq!(rep.zero_rhs_rows.len(), 4);
    }

    #[test]
    fn eq5_lambda_at_critical_index_withheld() {
        let params = CertifyParams { lambda: 0.5, ..CertifyParams::default() };
        let hyps = registry_hypotheses("eq5", &params, 1).unwrap();
        assert!(hyps.iter().any(|h| !h.satisfied && h.name.contains("lambda")));
        let rep = certify_inequality("eq5", &params, &standard_1d(4), &[129]).unwrap();
        assert_eq!(rep.verdict, Verdict::HypothesesUnmet);
        assert!(!rep.rows.is_empty());
    }

    #[test]
    fn eq3_reduces_to_eq2_exactly() {
        let corpus = standard_1d(6);
        let rep = certify_inequality("eq3", &CertifyParams::default(), &corpus, &[129]).unwrap();
        assert_eq!(rep.check("single_function_reduction").unwrap().value, 0.0);
    }

    #[test]
    fn unknown_names_and_bad_params() {
        let corpus = standard_1d(2);
        assert!(certify_inequality("eq99", &CertifyParams::default(), &corpus, &[65]).is_err());
        assert!(certify_inequality("eq2", &CertifyParams::default(), &corpus, &[]).is_err());
        let bad = CertifyParams { theta: -1.0, ..CertifyParams::default() };
        match certify_inequality("eq2", &bad, &corpus, &[65]) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "params.theta"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn report_json_round_trip() {
        let rep = certify_inequality("thm81", &CertifyParams::default(), &standard_1d(5), &[129, 257]).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert_eq!(InequalityReport::from_json(&rep.to_json().unwrap()).unwrap(), rep);
    }

    #[test]
    fn constant_weight_has_unmet_omega() {
        let params = CertifyParams { weight: Some(RadialWeight::Power { exponent: 0.0 }), ..CertifyParams::default() };
        let hyps = registry_hypotheses("thm41i", &params, 1).unwrap();
        assert!(hyps.iter().any(|h| h.name == "w in Omega_theta" && !h.satisfied));
    }
}
