use crate::error::{Error, Result};
use crate::mixed_lebesgue::{conjugate, integral_of_product, mixed_norm, power_sum, MixedExponent};
use crate::morrey_herz::{RadialGrid, RadialWeight};
use crate::operators::hl_maximal;
use crate::sampled::{Grid, SampledFunction};
use serde::{Deserialize, Serialize};

/// Relative bound slack when certifying block norms.
const BLOCK_SLACK: f64 = 1e-10;
/// Largest relative change of the supremum under a one-octave tail extension
/// for the weight condition to count as stable.
const EQ12_STABILITY: f64 = 0.05;

/// A function supported in `[-R, R]^n` whose dual mixed norm is at most `w(R)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Block {
    pub a: SampledFunction,
    pub radius: f64,
    /// `w(R)`.
    pub bound: f64,
    /// Measured dual mixed norm of `a`.
    pub norm: f64,
    pub certified: bool,
}

impl Block {
    fn new(a: SampledFunction, radius: f64, bound: f64, p_dual: &MixedExponent) -> Result<Self> {
        let norm = mixed_norm(&a, p_dual, None)?;
        Ok(Block { a, radius, bound, norm, certified: norm <= bound * (1.0 + BLOCK_SLACK) })
    }
}

fn restrict_saturating(f: &SampledFunction, r: f64) -> Result<SampledFunction> {
    f.restrict(r.min(f.grid().half_width()))
}

/// Scales `f` restricted to `[-R, R]^n` so that its dual mixed norm equals `w(R)`.
pub fn make_block(f: &SampledFunction, radius: f64, p_dual: &MixedExponent, w: &RadialWeight) -> Result<Block> {
    if !(radius > 0.0) {
        return Err(Error::param("block radius must be positive"));
    }
    let restricted = restrict_saturating(f, radius)?;
    let norm = mixed_norm(&restricted, p_dual, None)?;
    if norm == 0.0 {
        return Err(Error::param("function vanishes on the block cube, cannot normalize"));
    }
    let bound = w.eval(radius)?;
    Block::new(restricted.scale(bound / norm)?, radius, bound, p_dual)
}

/// One-dimensional norming block at radius `2^j`:
/// `sgn(f) w(2^j) |f|^(p-1) chi_B / ||f chi_B||_p^(p-1)`.
pub fn norming_block(f: &SampledFunction, j: i32, p: &MixedExponent, w: &RadialWeight) -> Result<Block> {
    if f.grid().dim() != 1 || p.len() != 1 {
        return Err(Error::Unsupported("norming blocks are implemented in one dimension".into()));
    }
    let q = p.entries()[0];
    if !(q >= 1.0 && q.is_finite()) {
        return Err(Error::param(format!("norming exponent must be finite and at least 1, got {q}")));
    }
    let r = 2f64.powi(j);
    let fb = restrict_saturating(f, r)?;
    let norm = mixed_norm(&fb, p, None)?;
    if norm == 0.0 {
        return Err(Error::param("function vanishes on the ball, no norming block exists"));
    }
    let bound = w.eval(r)?;
    let scale = bound / norm.powf(q - 1.0);
    let g = fb.map(|v| if v == 0.0 { 0.0 } else { v.signum() * v.abs().powf(q - 1.0) * scale })?;
    Block::new(g, r, bound, &MixedExponent::new(vec![conjugate(q)?])?)
}

/// `integral f g` by the trapezoid rule.
pub fn pairing(f: &SampledFunction, g: &SampledFunction) -> Result<f64> {
    integral_of_product(f, g)
}

/// Finite combination `sum_j rho_j A_j` with the coefficient norm `(sum |rho_j|^theta')^(1/theta')`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockSum {
    pub terms: Vec<(f64, Block)>,
    pub theta_dual: f64,
    pub coefficient_norm: f64,
}

impl BlockSum {
    /// `theta` is the outer exponent of the primal space; coefficients are summed in its conjugate.
    pub fn new(terms: Vec<(f64, Block)>, theta: f64) -> Result<Self> {
        let theta_dual = conjugate(theta)?;
        let coefficient_norm = lp_of(terms.iter().map(|t| t.0.abs()), theta_dual);
        Ok(BlockSum { terms, theta_dual, coefficient_norm })
    }

    pub fn function(&self, grid: Grid) -> Result<SampledFunction> {
        let mut v = vec![0.0; grid.len()];
        for (rho, b) in &self.terms {
            if !b.a.grid().same_as(&grid) {
                return Err(Error::GridMismatch("block lives on a different grid".into()));
            }
            for (o, a) in v.iter_mut().zip(b.a.values()) {
                *o += rho * a;
            }
        }
        Ok(SampledFunction::from_raw(grid, v))
    }
}

fn lp_of(values: impl Iterator<Item = f64> + Clone, p: f64) -> f64 {
    let scale = values.clone().fold(0.0f64, f64::max);
    if p.is_infinite() || scale == 0.0 {
        return scale;
    }
    scale * values.map(|v| (v / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Outcome of the weight integrability test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Eq12Report {
    pub beta: f64,
    pub nodes: Vec<f64>,
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    /// Supremum over the same nodes with the tail extended by one octave.
    pub extended_sup_ratio: f64,
    pub relative_change: f64,
    pub holds: bool,
    pub diverging: bool,
}

fn eq12_ratios(w: &RadialWeight, beta: f64, rgrid: &RadialGrid) -> Result<Vec<f64>> {
    let nodes = rgrid.nodes();
    let wv = w.eval_many(nodes)?;
    if wv.iter().any(|v| *v <= 0.0) {
        return Err(Error::param("weight vanishes on the radial grid"));
    }
    let integrand: Vec<f64> = nodes.iter().zip(&wv).map(|(r, v)| r.powf(beta) * v).collect();
    let du = rgrid.du();
    let mut tail = vec![0.0; nodes.len()];
    for k in (0..nodes.len() - 1).rev() {
        tail[k] = tail[k + 1] + 0.5 * du * (integrand[k] + integrand[k + 1]);
    }
    Ok(tail.iter().zip(&integrand).map(|(t, i)| t / i).collect())
}

/// Tests `integral_r^inf t^(beta-1) w(t) dt <= C r^beta w(r)` with
/// `beta = (sum 1/p_i - sum 1/s_i) / n`, over the radial grid.
pub fn eq12_weight_check(w: &RadialWeight, p: &MixedExponent, s: &MixedExponent, rgrid: &RadialGrid) -> Result<Eq12Report> {
    if p.len() != s.len() {
        return Err(Error::param("p and s must have the same length"));
    }
    if p.entries().iter().zip(s.entries()).any(|(a, b)| !(b > a)) {
        return Err(Error::param("each s_i must exceed p_i"));
    }
    let beta = (power_sum(p) - power_sum(s)) / p.len() as f64;
    let ratios = eq12_ratios(w, beta, rgrid)?;
    let wide = rgrid.extended(0, 1)?;
    let wide_ratios = eq12_ratios(w, beta, &wide)?;
    let sup_ratio = ratios.iter().fold(0.0f64, |a, b| a.max(*b));
    let extended_sup_ratio = wide_ratios[..ratios.len()].iter().fold(0.0f64, |a, b| a.max(*b));
    let relative_change = (extended_sup_ratio - sup_ratio).abs() / sup_ratio.max(f64::MIN_POSITIVE);
    let holds = sup_ratio.is_finite() && relative_change < EQ12_STABILITY;
    Ok(Eq12Report {
        beta,
        nodes: rgrid.nodes().to_vec(),
        ratios,
        sup_ratio,
        extended_sup_ratio,
        relative_change,
        holds,
        diverging: !holds && extended_sup_ratio > sup_ratio,
    })
}

/// Block-sum bound of `h = sum_j rho_j (M[|A_j|^s'])^(1/s')` against the coefficient norm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma61Report {
    /// The scalar power `s_* = min_i s_i`.
    pub s_star: f64,
    /// Per-annulus coefficients `||h chi_k||_{p'} / w(2^k)`.
    pub annulus_coefficients: Vec<f64>,
    /// `l^theta'` norm of the annulus coefficients, an upper bound of the block norm of `h`.
    pub h_bound: f64,
    pub coefficient_norm: f64,
    pub ratio: f64,
}

/// Decomposes `h` into sup-norm dyadic annuli `2^(k-1) < |x|_inf <= 2^k`
/// (with the innermost cube `|x|_inf <= 2^j_min`), each piece being a block at
/// radius `2^k`, and compares the resulting coefficient norm to that of `sum`.
pub fn lemma61_surrogate(
    sum: &BlockSum,
    s: &MixedExponent,
    p_dual: &MixedExponent,
    w: &RadialWeight,
    j_min: i32,
) -> Result<Lemma61Report> {
    let first = sum.terms.first().ok_or_else(|| Error::param("block sum is empty"))?;
    let grid = *first.1.a.grid();
    let s_star = s.entries().iter().copied().fold(f64::INFINITY, f64::min);
    let sp = conjugate(s_star)?;
    let mut h = vec![0.0; grid.len()];
    for (rho, b) in &sum.terms {
        let powered = if sp.is_infinite() { b.a.abs() } else { b.a.map(|v| v.abs().powf(sp))? };
        let mf = hl_maximal(&powered);
        for (o, v) in h.iter_mut().zip(mf.values()) {
            let root = if sp.is_infinite() { *v } else { v.powf(1.0 / sp) };
            *o += rho.abs() * root;
        }
    }
    let corner = grid.half_width();
    let k_max = (corner.log2().ceil() as i32).max(j_min);
    let dim = grid.dim();
    let mut coeffs = Vec::new();
    for k in j_min..=k_max {
        let outer = 2f64.powi(k);
        let inner = if k == j_min { -1.0 } else { 2f64.powi(k - 1) };
        let slack = 1e-9 * grid.spacing();
        let piece: Vec<f64> = (0..grid.len())
            .map(|i| {
                let p = grid.position(i);
                let r = p[..dim].iter().fold(0.0f64, |a, x| a.max(x.abs()));
                if r > inner + slack && r <= outer + slack {
                    h[i]
                } else {
                    0.0
                }
            })
            .collect();
        let norm = mixed_norm(&SampledFunction::from_raw(grid, piece), p_dual, None)?;
        coeffs.push(norm / w.eval(outer)?);
    }
    let h_bound = lp_of(coeffs.iter().copied(), sum.theta_dual);
    let coefficient_norm = sum.coefficient_norm;
    Ok(Lemma61Report {
        s_star,
        annulus_coefficients: coeffs,
        h_bound,
        coefficient_norm,
        ratio: if coefficient_norm > 0.0 { h_bound / coefficient_norm } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampled::{sample, FunctionSpec};

    fn p1(v: f64) -> MixedExponent {
        MixedExponent::new(vec![v]).unwrap()
    }

    #[test]
    fn block_of_indicator() {
        let g = Grid::new(1, 4.0, 257).unwrap();
        let f = sample(&FunctionSpec::centered_cube(1, 1.0), &g).unwrap();
        let w = RadialWeight::Power { exponent: 0.0 };
        let b = make_block(&f, 1.0, &p1(2.0), &w).unwrap();
        assert!(b.certified);
        assert!((b.norm - 1.0).abs() < 1e-10);
        // The cell rule gives the indicator an extra half cell at each edge.
        let h = g.spacing();
        assert!((b.a.evaluate(&[0.0]).unwrap() - (2.0 + h).powf(-0.5)).abs() < 1e-12);
        assert_eq!(b.a.evaluate(&[1.5]).unwrap(), 0.0);
        assert!(make_block(&SampledFunction::zeros(g), 1.0, &p1(2.0), &w).is_err());
    }

    #[test]
    fn norming_block_pairing() {
        let g = Grid::new(1, 4.0, 257).unwrap();
        let f = sample(&FunctionSpec::centered_cube(1, 1.0), &g).unwrap();
        let w = RadialWeight::Power { exponent: 0.0 };
        let b = norming_block(&f, 0, &p1(2.0), &w).unwrap();
        let pair = pairing(&f, &b.a).unwrap();
        let fnorm = mixed_norm(&f.restrict(1.0).unwrap(), &p1(2.0), None).unwrap();
        assert!((pair - fnorm).abs() < 1e-12);
        assert!((pair - 2f64.sqrt()).abs() < g.spacing());
        assert!(b.certified);
        let g2 = Grid::new(2, 1.0, 17).unwrap();
        assert!(norming_block(&SampledFunction::zeros(g2), 0, &p1(2.0), &w).is_err());
    }

    #[test]
    fn pairing_basics() {
        let g = Grid::new(1, 4.0, 257).unwrap();
        let f = sample(&FunctionSpec::centered_cube(1, 1.0), &g).unwrap();
        let v = pairing(&f, &f).unwrap();
        assert!((v - 2.0).abs() <= g.spacing() + 1e-12);
        let far = sample(&FunctionSpec::cube(&[3.0], 0.5), &g).unwrap();
        assert_eq!(pairing(&f, &far).unwrap(), 0.0);
    }

    #[test]
    fn eq12_examples() {
        let rg = RadialGrid::new(-10, 10, 32).unwrap();
        let w = RadialWeight::morrey(0.25, 2.0);
        let rep = eq12_weight_check(&w, &p1(2.0), &p1(4.0), &rg).unwrap();
        assert!(rep.holds);
        assert!((rep.sup_ratio - 2.0).abs() < 0.01, "{}", rep.sup_ratio);
        // Scale invariance away from the truncated tail.
        let (a, b) = (rep.ratios[32], rep.ratios[5 * 32]);
        assert!((a - b).abs() < 0.01 * a);
        let flat = eq12_weight_check(&RadialWeight::Power { exponent: 0.0 }, &p1(2.0), &p1(4.0), &rg).unwrap();
        assert!(!flat.holds && flat.diverging);
        assert!(eq12_weight_check(&w, &p1(2.0), &p1(1.5), &rg).is_err());
    }
}
