//! Acceptance run: one line per criterion, `PASS` or `FAIL`, with the
//! measured quantities. Criteria listed in `KNOWN_RED` are reported but do
//! not fail the run; every other failure makes the binary exit non-zero.

use mixmorrey::certify::{
    build_corpus, certify_inequality, default_resolutions, CertifyParams, Corpus, CorpusConfig, CorpusEntry,
    InequalityReport, Verdict,
};
use mixmorrey::decomposition::{
    atomic_decompose, atomic_synthesize, cz_decompose, level_set, norming_block, pairing, whitney_with, Exterior,
};
use mixmorrey::mixed_lebesgue::{mixed_norm, MixedExponent};
use mixmorrey::morrey_herz::{
    lm_lambda_norm, lm_norm, omega_check, AdmissibilityVerdict, MorreyParams, RadialGrid, RadialWeight,
};
use mixmorrey::operators::{grand_maximal, heat_sup, hl_maximal, log_times, TestFamily};
use mixmorrey::sampled::{sample, FunctionSpec, Grid, SampledFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

/// Criteria whose failure is understood and documented; they still print `FAIL`.
const KNOWN_RED: [u32; 1] = [10];

const DEF22_TOL: f64 = 1e-10;
const CLOSED_FORM_TOL: f64 = 0.01;
const DRIFT_LIMIT: f64 = 0.10;
const HEAT_SLACK: f64 = 0.02;
const PAIRING_SLACK: f64 = 0.05;
const NORMING_TOL: f64 = 0.01;
const RECONSTRUCTION_TOL: f64 = 1e-10;
const MOMENT_TOL: f64 = 1e-8;
const DEGENERATE_GROWTH: f64 = 10.0;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

type Check = fn() -> Outcome;

fn p(v: f64, dim: usize) -> MixedExponent {
    MixedExponent::uniform(v, dim).unwrap()
}

fn standard_corpus(dim: usize) -> Corpus {
    build_corpus(&CorpusConfig::standard(dim, &p(2.0, dim))).unwrap()
}

fn certify(name: &str, dim: usize) -> InequalityReport {
    certify_inequality(name, &CertifyParams::default(), &standard_corpus(dim), &default_resolutions(dim)).unwrap()
}

fn indicator_rgrid() -> RadialGrid {
    RadialGrid::new(-20, 20, 32).unwrap()
}

fn unit_indicator(points: usize) -> SampledFunction {
    let g = Grid::new(1, 4.0, points).unwrap();
    sample(&FunctionSpec::centered_cube(1, 1.0), &g).unwrap()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let corpus = standard_corpus(1).truncated(20);
    let grid = Grid::new(1, 4.0, 513).unwrap();
    let rgrid = RadialGrid::new(-12, 12, 16).unwrap();
    let (lambda, theta) = (0.25, 2.0);
    let weighted = MorreyParams::weighted(p(2.0, 1), theta, RadialWeight::morrey(lambda, theta));
    let indexed = MorreyParams::lambda(p(2.0, 1), theta, lambda);
    let mut worst = 0.0f64;
    for f in corpus.sample(&grid).unwrap() {
        let a = lm_norm(&f, &weighted, &rgrid).unwrap().value;
        let b = lm_lambda_norm(&f, &indexed, &rgrid).unwrap().value;
        worst = worst.max((a - b).abs() / b.abs().max(f64::MIN_POSITIVE));
    }
    let elapsed = start.elapsed();
    outcome(
        corpus.len() == 20 && worst <= DEF22_TOL && elapsed < Duration::from_secs(10),
        format!("20 functions, max relative difference {worst:.2e}, {:.2} s", elapsed.as_secs_f64()),
    )
}

/// `2^P (1/((P - lambda) theta) + 1/(lambda theta))^(1/theta)` for the indicator of `[-1, 1]`.
fn indicator_formula(q: f64, theta: f64, lambda: f64) -> f64 {
    let big_p = 1.0 / q;
    big_p.exp2() * (1.0 / ((big_p - lambda) * theta) + 1.0 / (lambda * theta)).powf(1.0 / theta)
}

fn criterion_2() -> Outcome {
    let f = unit_indicator(513);
    let rgrid = indicator_rgrid();
    let value = |q: f64, theta: f64, lambda: f64| {
        lm_lambda_norm(&f, &MorreyParams::lambda(p(q, 1), theta, lambda), &rgrid).unwrap().value
    };
    let base = value(2.0, 2.0, 0.25);
    let base_err = (base - 2.0 * 2f64.sqrt()).abs() / (2.0 * 2f64.sqrt());
    let sweep = [
        (2.0, 2.0, 0.25),
        (1.0, 1.0, 0.5),
        (1.0, 2.0, 0.5),
        (1.0, 3.0, 0.3),
        (1.5, 2.0, 0.3),
        (2.0, 4.0, 0.2),
        (2.0, 3.0, 0.25),
        (3.0, 4.0, 0.15),
        (4.0, 6.0, 0.125),
        (1.25, 1.5, 0.4),
    ];
    let worst = sweep
        .iter()
        .map(|&(q, t, l)| {
            let exact = indicator_formula(q, t, l);
            (value(q, t, l) - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    outcome(
        base_err <= CLOSED_FORM_TOL && worst <= CLOSED_FORM_TOL,
        format!("value {base:.6} (rel. error {base_err:.2e}); 10-point sweep max rel. error {worst:.2e}"),
    )
}

fn criterion_3() -> Outcome {
    let (lo, hi) = (0.95 * 0.25f64.exp2().recip() * 2f64.ln().sqrt(), 1.05 * 0.25f64.exp2() * 2f64.ln().sqrt());
    let mut ok = true;
    let mut parts = Vec::new();
    for dim in 1..=3 {
        let rep = certify("lem81", dim);
        let (min, max) = ratio_range(&rep);
        ok &= rep.verdict == Verdict::Pass && min >= lo && max <= hi;
        parts.push(format!("{dim}D {} [{min:.4}, {max:.4}]", rep.verdict.as_str()));
    }
    let params = CertifyParams {
        rgrid: mixmorrey::morrey_herz::RadialGridSpec { j_min: -20, j_max: 20, points_per_octave: 32 },
        ..CertifyParams::default()
    };
    let entry = CorpusEntry { id: "unit_cube".into(), spec: FunctionSpec::centered_cube(1, 1.0) };
    let corpus = Corpus::new(1, 0, vec![entry]).unwrap();
    let rep = certify_inequality("lem81", &params, &corpus, &[513]).unwrap();
    let example = rep.max_ratio.unwrap_or(f64::NAN);
    ok &= (example - 0.8284).abs() <= 0.01 * 0.8284 && (0.700..=0.990).contains(&example);
    outcome(ok, format!("bracket [{lo:.4}, {hi:.4}]; {}; unit cube ratio {example:.4}", parts.join(", ")))
}

fn ratio_range(rep: &InequalityReport) -> (f64, f64) {
    rep.rows
        .iter()
        .filter_map(|r| r.ratio)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r), b.max(r)))
}

fn criterion_4() -> Outcome {
    let lambda: f64 = 0.25;
    let cap = 1.05 / (1.0 - (-lambda).exp2()) * lambda.exp2() * 2f64.ln().sqrt();
    let mut ok = true;
    let mut parts = Vec::new();
    for dim in 1..=3 {
        let rep = certify("thm81", dim);
        let upper = rep.bracket.as_ref().and_then(|b| b.upper).unwrap_or(f64::INFINITY);
        let (min, max) = ratio_range(&rep);
        let drift = rep.drift.unwrap_or(f64::INFINITY);
        ok &= rep.verdict == Verdict::Pass && upper <= cap * (1.0 + 1e-12) && min > 0.0 && drift < DRIFT_LIMIT;
        parts.push(format!("{dim}D [{min:.4}, {max:.4}] drift {drift:.2e}"));
    }
    outcome(ok, format!("upper end cap {cap:.4}; {}", parts.join(", ")))
}

/// Largest window average of `|f|` over centered windows of `(2k+1)^n` nodes, summed directly.
fn brute_maximal(f: &SampledFunction) -> Vec<f64> {
    let grid = *f.grid();
    let dim = grid.dim();
    let m = grid.points() as i64;
    (0..grid.len())
        .map(|i| {
            let ix = grid.unravel(i);
            (0..=m)
                .map(|k| {
                    let sum: f64 = (0..grid.len())
                        .filter(|&j| {
                            let jx = grid.unravel(j);
                            (0..dim).all(|a| (jx[a] as i64 - ix[a] as i64).abs() <= k)
                        })
                        .map(|j| f.values()[j].abs())
                        .sum();
                    sum / ((2 * k + 1) as f64).powi(dim as i32)
                })
                .fold(0.0, f64::max)
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let shapes = [(1, 17), (1, 33), (1, 63), (2, 17), (2, 21)];
    let mut exact = 0;
    let mut worst_generic = 0.0f64;
    for k in 0..50 {
        let (dim, m) = shapes[k % shapes.len()];
        let g = Grid::new(dim, 1.0, m).unwrap();
        // Dyadic values keep every partial sum exact, so both evaluation orders agree bit for bit.
        let dyadic: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-4096i32..=4096) as f64 / 1024.0).collect();
        let f = SampledFunction::from_values(g, dyadic).unwrap();
        if hl_maximal(&f).values() == brute_maximal(&f).as_slice() {
            exact += 1;
        }
        let generic: Vec<f64> = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let f = SampledFunction::from_values(g, generic).unwrap();
        for (a, b) in hl_maximal(&f).values().iter().zip(brute_maximal(&f)) {
            worst_generic = worst_generic.max((a - b).abs() / b.max(f64::MIN_POSITIVE));
        }
    }
    let f = unit_indicator(81);
    let at3 = hl_maximal(&f).evaluate(&[3.0]).unwrap();
    let h = f.grid().spacing();
    // One spacing moves the window edge by h: the value lies between 2/(8+2h) and (2+h)/8.
    let within = at3 >= 2.0 / (8.0 + 2.0 * h) - 1e-15 && at3 <= (2.0 + h) / 8.0 + 1e-15;
    outcome(
        exact == 50 && worst_generic <= 1e-12 && within,
        format!("{exact}/50 bit-identical, generic max rel. diff {worst_generic:.1e}; M chi(3) = {at3:.5} (h = {h})"),
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    let corpus = standard_corpus(1);
    let res = default_resolutions(1);
    let params = CertifyParams::default();
    let mut reports = Vec::new();
    for name in ["eq2", "eq3", "eq4"] {
        let rep = certify_inequality(name, &params, &corpus, &res).unwrap();
        let finite = rep.rows.iter().all(|r| r.ratio.is_some_and(f64::is_finite)) && !rep.rows.is_empty();
        let drift = rep.drift.unwrap_or(f64::INFINITY);
        ok &= finite && drift < DRIFT_LIMIT;
        parts.push(format!("{name} max {:.4} drift {drift:.2e}", rep.max_ratio.unwrap_or(f64::NAN)));
        reports.push(rep);
    }
    let reduction = reports[1].check("single_function_reduction").map(|c| (c.passed, c.value));
    let reduction_ok = matches!(reduction, Some((true, v)) if v == 0.0);
    let elapsed = start.elapsed();
    ok &= reduction_ok && corpus.len() >= 30 && elapsed < Duration::from_secs(120);
    outcome(
        ok,
        format!(
            "corpus {}; {}; eq3 reduction exact: {reduction_ok}; {:.1} s",
            corpus.len(),
            parts.join(", "),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_7() -> Outcome {
    let params = CertifyParams::default();
    let mut ok = params.t_min <= 1e-3;
    let mut parts = Vec::new();
    for dim in 1..=2 {
        let rep = certify_inequality("eq11", &params, &standard_corpus(dim), &default_resolutions(dim)).unwrap();
        let worst = rep.rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max);
        let upper = rep.check("upper_constant");
        let upper_ok = upper.is_some_and(|c| c.passed && c.value.is_finite());
        ok &= worst <= 1.0 + HEAT_SLACK && upper_ok && rep.zero_rhs_rows.is_empty();
        parts.push(format!(
            "{dim}D max lhs/rhs {worst:.4}, upper constant {:.4} stable: {upper_ok}",
            upper.map_or(f64::NAN, |c| c.value)
        ));
    }
    outcome(ok, parts.join("; "))
}

fn criterion_8() -> Outcome {
    let mut violations = 0usize;
    let mut nodes = 0usize;
    let mut c1c2 = 0.0;
    for (dim, m) in [(1, 257), (2, 65)] {
        let corpus = standard_corpus(dim);
        let grid = Grid::new(dim, 4.0, m).unwrap();
        let family = TestFamily::standard(dim, 1).unwrap();
        let times = log_times(1e-3, 4.0, 13).unwrap();
        let scales: Vec<f64> = times.iter().map(|t| 2.0 * t.sqrt()).collect();
        let c1 = family.heat_constant().unwrap();
        let c2 = family.maximal_bound(&grid, &scales);
        c1c2 = f64::max(c1c2, c1 * c2);
        for f in corpus.sample(&grid).unwrap() {
            let hs = heat_sup(&f, &times).unwrap().function;
            let gm = grand_maximal(&f, &family, &scales).unwrap();
            let mf = hl_maximal(&f);
            for i in 0..grid.len() {
                nodes += 1;
                let slack = |x: f64| x * (1.0 + 1e-12) + 1e-15;
                if hs.values()[i] > slack(c1 * gm.values()[i]) || gm.values()[i] > slack(c2 * mf.values()[i]) {
                    violations += 1;
                }
            }
        }
    }
    outcome(violations == 0, format!("{violations} violations over {nodes} nodes (1D and 2D corpora); C1*C2 = {c1c2:.4}"))
}

fn criterion_9() -> Outcome {
    let corpus = standard_corpus(1).truncated(10);
    let grid = Grid::new(1, 4.0, 257).unwrap();
    let mut worst_reconstruction = 0.0f64;
    let mut whitney_ok = true;
    let mut atoms_ok = true;
    let mut worst_moment = 0.0f64;
    let mut monotone = 0;
    let mut strictly = 0;
    for f in corpus.sample(&grid).unwrap() {
        let mf = hl_maximal(&f);
        for j in [-2, 0, 1] {
            let cz = cz_decompose(&f, j, 1, &mf).unwrap();
            let scale = f.max_abs().max(1.0);
            worst_reconstruction = worst_reconstruction.max(f.sub(&cz.reconstruct()).unwrap().max_abs() / scale);
            let mask = level_set(&mf, j);
            if !mask.is_empty() {
                whitney_ok &= whitney_with(&mask, Exterior::Complement).unwrap().check().all_ok();
            }
        }
        let narrow = atomic_decompose(&f, 1, -4, 4).unwrap();
        let wide = atomic_decompose(&f, 1, -8, 8).unwrap();
        for atom in narrow.atoms.iter().chain(&wide.atoms) {
            atoms_ok &= atom.a.max_abs() <= 1.0 + 1e-12;
            atoms_ok &= atom.a.iter().all(|(i, _)| atom.cube.contains(&grid.position(i)[..1]));
            let rel = atom.moment_residual / atom.cube.volume();
            worst_moment = worst_moment.max(rel);
        }
        let synth = atomic_synthesize(&wide);
        atoms_ok &= (f.sub(&synth).unwrap().max_abs() - wide.residual).abs() <= 1e-12;
        if wide.residual <= narrow.residual + 1e-12 {
            monotone += 1;
        }
        if wide.residual < narrow.residual - 1e-12 {
            strictly += 1;
        }
    }
    // Coarse 2D grids are reported but not scored: see the residual note in the README.
    let coarse = standard_corpus(2).truncated(10);
    let grid2 = Grid::new(2, 4.0, 33).unwrap();
    let coarse_rises = coarse
        .sample(&grid2)
        .unwrap()
        .iter()
        .filter(|f| {
            let narrow = atomic_decompose(f, 1, -4, 4).unwrap().residual;
            atomic_decompose(f, 1, -8, 8).unwrap().residual > narrow + 1e-12
        })
        .count();
    outcome(
        worst_reconstruction <= RECONSTRUCTION_TOL
            && whitney_ok
            && atoms_ok
            && worst_moment <= MOMENT_TOL
            && monotone == corpus.len(),
        format!(
            "CZ residual {worst_reconstruction:.1e}; Whitney ok: {whitney_ok}; atoms ok: {atoms_ok}, moment {worst_moment:.1e}; \
             residual [-8,8] vs [-4,4] non-increasing {monotone}/{n}, strictly smaller {strictly}/{n}; \
             2D m=33 rises {coarse_rises}/{n2}",
            n = corpus.len(),
            n2 = coarse.len()
        ),
    )
}

fn criterion_10() -> Outcome {
    let params = CertifyParams::default();
    let corpus = standard_corpus(1);
    let rep = certify_inequality("thm41i", &params, &corpus, &default_resolutions(1)).unwrap();
    let pairs = corpus.len() * params.block_sums_per_entry;
    let worst = rep.max_ratio.unwrap_or(f64::INFINITY);
    let bound_ok = pairs >= 100 && worst <= 1.0 + PAIRING_SLACK;

    let grid = Grid::new(1, 4.0, 513).unwrap();
    let w = RadialWeight::morrey(params.lambda, params.theta);
    let mut norming = 0.0f64;
    for f in corpus.sample(&grid).unwrap() {
        for j in [-1, 0, 1] {
            let Ok(b) = norming_block(&f, j, &p(2.0, 1), &w) else { continue };
            let r = (j as f64).exp2();
            let expected = b.bound * mixed_norm(&f.restrict(r).unwrap(), &p(2.0, 1), None).unwrap();
            norming = norming.max((pairing(&f, &b.a).unwrap() - expected).abs() / expected);
        }
    }
    outcome(
        bound_ok && norming <= NORMING_TOL,
        format!(
            "{pairs} pairs, verdict {}, max ratio {worst:.4} (limit {:.2}); norming identity max rel. error {norming:.1e}",
            rep.verdict.as_str(),
            1.0 + PAIRING_SLACK
        ),
    )
}

fn criterion_11() -> Outcome {
    let rep = certify("thm71", 1);
    let finite = !rep.rows.is_empty() && rep.rows.iter().all(|r| r.ratio.is_some_and(f64::is_finite));
    let drift = rep.drift.unwrap_or(f64::INFINITY);
    let identity = rep.check("hardy_spherical_identity");
    let identity_ok = identity.is_some_and(|c| c.passed);
    outcome(
        finite && drift < DRIFT_LIMIT && identity_ok,
        format!(
            "1D max ratio {:.4}, drift {drift:.2e}, H f vs H S f deviation {:.1e}",
            rep.max_ratio.unwrap_or(f64::NAN),
            identity.map_or(f64::NAN, |c| c.value)
        ),
    )
}

fn criterion_12() -> Outcome {
    let w = RadialWeight::Power { exponent: 0.0 };
    let verdict = omega_check(&w, 2.0, &p(2.0, 1)).unwrap().verdict;
    let f = unit_indicator(257);
    let params = MorreyParams::weighted(p(2.0, 1), 2.0, w);
    let truncated = |j_max| lm_norm(&f, &params, &RadialGrid::new(-12, j_max, 16).unwrap()).unwrap().value;
    let (short, long) = (truncated(2), truncated(10));
    let growth = long / short;
    outcome(
        verdict == AdmissibilityVerdict::TrivialSpace && growth >= DEGENERATE_GROWTH,
        format!("verdict {verdict:?}; norm {short:.4} at j_max = 2, {long:.4} at j_max = 10 (x{growth:.2})"),
    )
}

fn main() {
    let criteria: [(u32, &str, Check); 12] = [
        (1, "weighted norm equals Morrey-index norm", criterion_1),
        (2, "closed-form indicator norm", criterion_2),
        (3, "continuous/dyadic bracket", criterion_3),
        (4, "Herz equivalence bracket", criterion_4),
        (5, "maximal operator exactness", criterion_5),
        (6, "maximal operator constants", criterion_6),
        (7, "heat sandwich", criterion_7),
        (8, "pointwise domination chain", criterion_8),
        (9, "CZ and atomic integrity", criterion_9),
        (10, "block duality pairing", criterion_10),
        (11, "Hardy operator boundedness", criterion_11),
        (12, "degeneracy detection", criterion_12),
    ];
    let mut unexpected = 0;
    for (n, title, check) in criteria {
        let start = Instant::now();
        let o = check();
        let status = if o.passed { "PASS" } else { "FAIL" };
        let known = KNOWN_RED.contains(&n);
        let tag = match (o.passed, known) {
            (false, true) => " [known red]",
            (true, true) => " [known red now passing]",
            _ => "",
        };
        if !o.passed && !known {
            unexpected += 1;
        }
        println!("criterion {n:>2} {status} {title}{tag}: {} ({:.1} s)", o.detail, start.elapsed().as_secs_f64());
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
