use crate::error::{Error, Result};
use crate::mixed_lebesgue::{power_sum, MixedExponent};
use serde::{Deserialize, Serialize};

/// A positive weight on `(0, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialWeight {
    /// `r^exponent`.
    Power { exponent: f64 },
    /// `scale * (r/breakpoint)^low` below the breakpoint and
    /// `scale * (r/breakpoint)^high` above it.
    PiecewisePower {
        breakpoint: f64,
        low: f64,
        high: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    /// Log-log interpolated samples; undefined outside `[r[0], r[last]]`.
    Table { r: Vec<f64>, w: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl RadialWeight {
    /// The weight `r^(-lambda - 1/theta)` that turns the weighted norm into
    /// the Morrey norm with index `lambda`.
    pub fn morrey(lambda: f64, theta: f64) -> Self {
        let inv = if theta.is_infinite() { 0.0 } else { 1.0 / theta };
        RadialWeight::Power { exponent: -lambda - inv }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RadialWeight::Power { exponent } => {
                if !exponent.is_finite() {
                    return Err(Error::param("power weight exponent must be finite"));
                }
            }
            RadialWeight::PiecewisePower { breakpoint, low, high, scale } => {
                if !(breakpoint.is_finite() && *breakpoint > 0.0) {
                    return Err(Error::param("piecewise weight needs a positive breakpoint"));
                }
                if !(low.is_finite() && high.is_finite()) {
                    return Err(Error::param("piecewise weight exponents must be finite"));
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::param("piecewise weight scale must be positive"));
                }
            }
            RadialWeight::Table { r, w } => {
                if r.len() < 2 || r.len() != w.len() {
                    return Err(Error::param("table weight needs at least two matching (r, w) samples"));
                }
                if r.iter().any(|x| !(x.is_finite() && *x > 0.0)) || r.windows(2).any(|p| p[1] <= p[0]) {
                    return Err(Error::param("table radii must be positive and strictly increasing"));
                }
                if w.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    return Err(Error::param("table weight values must be positive"));
                }
            }
        }
        Ok(())
    }

    /// Value at `r > 0`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::param(format!("weight evaluated at invalid radius {r}")));
        }
        match self {
            RadialWeight::Power { exponent } => Ok(r.powf(*exponent)),
            RadialWeight::PiecewisePower { breakpoint, low, high, scale } => {
                let a = if r < *breakpoint { low } else { high };
                Ok(scale * (r / breakpoint).powf(*a))
            }
            RadialWeight::Table { r: rs, w } => {
                let first = rs[0];
                let last = *rs.last().unwrap();
                let tol = 1e-12;
                if r < first * (1.0 - tol) || r > last * (1.0 + tol) {
                    return Err(Error::param(format!(
                        "table weight is not defined at r = {r} (range [{first}, {last}])"
                    )));
                }
                let k = match rs.binary_search_by(|x| x.partial_cmp(&r).unwrap()) {
                    Ok(k) => return Ok(w[k]),
                    Err(k) => k.clamp(1, rs.len() - 1),
                };
                let (r0, r1) = (rs[k - 1].ln(), rs[k].ln());
                let (w0, w1) = (w[k - 1].ln(), w[k].ln());
                let t = (r.ln() - r0) / (r1 - r0);
                Ok((w0 + t * (w1 - w0)).exp())
            }
        }
    }

    pub fn eval_many(&self, rs: &[f64]) -> Result<Vec<f64>> {
        let out = rs.iter().map(|&r| self.eval(r)).collect::<Result<Vec<_>>>()?;
        if let Some(k) = out.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::param(format!("weight is not positive and finite at r = {}", rs[k])));
        }
        Ok(out)
    }

    /// `r^shift * w(r)`.
    pub fn shifted(&self, shift: f64) -> RadialWeight {
        match self {
            RadialWeight::Power { exponent } => RadialWeight::Power { exponent: exponent + shift },
            RadialWeight::PiecewisePower { breakpoint, low, high, scale } => RadialWeight::PiecewisePower {
                breakpoint: *breakpoint,
                low: low + shift,
                high: high + shift,
                scale: scale * breakpoint.powf(shift),
            },
            RadialWeight::Table { r, w } => RadialWeight::Table {
                r: r.clone(),
                w: r.iter().zip(w).map(|(x, y)| y * x.powf(shift)).collect(),
            },
        }
    }
}

/// `(v1, v2) = (r^(-P-1) w, r^(-P) w)` with `P = sum 1/p_i`.
pub fn derive_hat_weights(w: &RadialWeight, p: &MixedExponent) -> (RadialWeight, RadialWeight) {
    let big_p = power_sum(p);
    (w.shifted(-big_p - 1.0), w.shifted(-big_p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmissibilityVerdict {
    Admissible,
    /// The tail norm of `w` is infinite, so the space contains only zero.
    TrivialSpace,
    /// The weight blows up too fast at the origin, forcing `f(0) = 0`.
    #[serde(rename = "f(0)=0_forced")]
    FZeroForced,
}

/// Tail and head norms at one test radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailEstimate {
    pub t: f64,
    /// `||w||_{L_theta(t, inf)}`.
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub tail: f64,
    /// `||w(r) r^P||_{L_theta(0, t)}`.
    #[serde(with = "crate::serde_ext::ext_f64")]
    pub head: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub in_omega_theta: bool,
    pub in_omega_p_theta: bool,
    pub tail_norm_estimates: Vec<TailEstimate>,
    pub verdict: AdmissibilityVerdict,
}

/// `(int_x^y (s (r/b)^a)^theta dr)^(1/theta)`; `y` may be infinite and
/// `x` may be zero. Infinite when the integral diverges.
fn power_piece(s: f64, b: f64, a: f64, theta: f64, x: f64, y: f64) -> f64 {
    if y <= x {
        return 0.0;
    }
    if theta.is_infinite() {
        let at = |r: f64| -> f64 {
            if r == 0.0 {
                if a < 0.0 {
                    f64::INFINITY
                } else if a == 0.0 {
                    s
                } else {
                    0.0
                }
            } else if r.is_infinite() {
                if a > 0.0 {
                    f64::INFINITY
                } else if a == 0.0 {
                    s
                } else {
                    0.0
                }
            } else {
                s * (r / b).powf(a)
            }
        };
        return at(x).max(at(y));
    }
    let e = a * theta + 1.0;
    let prim = |r: f64| -> f64 {
        if e == 0.0 {
            (r / b).ln()
        } else {
            (r / b).powf(e) / e
        }
    };
    let val = if y.is_infinite() {
        if e >= 0.0 {
            return f64::INFINITY;
        }
        -prim(x)
    } else if x == 0.0 {
        if e <= 0.0 {
            return f64::INFINITY;
        }
        prim(y)
    } else {
        prim(y) - prim(x)
    };
    (s.powf(theta) * b * val).powf(1.0 / theta)
}

fn combine(a: f64, b: f64, theta: f64) -> f64 {
    if a.is_infinite() || b.is_infinite() {
        f64::INFINITY
    } else if theta.is_infinite() {
        a.max(b)
    } else {
        (a.powf(theta) + b.powf(theta)).powf(1.0 / theta)
    }
}

const TEST_RADII: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Decide membership in the weight classes and classify the degenerate cases.
pub fn omega_check(w: &RadialWeight, theta: f64, p: &MixedExponent) -> Result<AdmissibilityReport> {
    w.validate()?;
    if !(theta > 0.0) {
        return Err(Error::param("outer exponent must be positive"));
    }
    let big_p = power_sum(p);
    let (tail_ok, head_ok, estimates) = match w {
        RadialWeight::Power { exponent: a } => {
            let a = *a;
            let tail_ok = if theta.is_infinite() { a <= 0.0 } else { a * theta < -1.0 };
            let head_ok = if theta.is_infinite() { a + big_p >= 0.0 } else { (a + big_p) * theta > -1.0 };
            let est = TEST_RADII
                .iter()
                .map(|&t| TailEstimate {
                    t,
                    tail: power_piece(1.0, 1.0, a, theta, t, f64::INFINITY),
                    head: power_piece(1.0, 1.0, a + big_p, theta, 0.0, t),
                })
                .collect();
            (tail_ok, head_ok, est)
        }
        RadialWeight::PiecewisePower { breakpoint: b, low, high, scale: s } => {
            let (b, low, high, s) = (*b, *low, *high, *s);
            let tail = |t: f64| {
                if t >= b {
                    power_piece(s, b, high, theta, t, f64::INFINITY)
                } else {
                    combine(
                        power_piece(s, b, low, theta, t, b),
                        power_piece(s, b, high, theta, b, f64::INFINITY),
                        theta,
                    )
                }
            };
            // w(r) r^P = s b^P (r/b)^(a+P)
            let sp = s * b.powf(big_p);
            let head = |t: f64| {
                if t <= b {
                    power_piece(sp, b, low + big_p, theta, 0.0, t)
                } else {
                    combine(
                        power_piece(sp, b, low + big_p, theta, 0.0, b),
                        power_piece(sp, b, high + big_p, theta, b, t),
                        theta,
                    )
                }
            };
            let est: Vec<TailEstimate> = TEST_RADII.iter().map(|&t| TailEstimate { t, tail: tail(t), head: head(t) }).collect();
            let tail_ok = est.iter().all(|e| e.tail.is_finite());
            let head_ok = est.iter().all(|e| e.head.is_finite());
            (tail_ok, head_ok, est)
        }
        RadialWeight::Table { r, .. } => table_estimates(w, r, theta, big_p)?,
    };
    let verdict = if !tail_ok {
        AdmissibilityVerdict::TrivialSpace
    } else if !head_ok {
        AdmissibilityVerdict::FZeroForced
    } else {
        AdmissibilityVerdict::Admissible
    };
    Ok(AdmissibilityReport {
        in_omega_theta: tail_ok,
        in_omega_p_theta: tail_ok && head_ok,
        tail_norm_estimates: estimates,
        verdict,
    })
}

/// Octave-by-octave partial norms with the doubling heuristic: a partial
/// norm that at least doubles across the last three octaves is declared
/// divergent.
fn table_estimates(w: &RadialWeight, rs: &[f64], theta: f64, big_p: f64) -> Result<(bool, bool, Vec<TailEstimate>)> {
    let lo = rs[0].log2();
    let hi = rs.last().unwrap().log2();
    if hi - lo < 4.0 {
        return Err(Error::param("table weight must span at least four octaves for the tail heuristic"));
    }
    let ppo = 32usize;
    let partial = |a: f64, b: f64, shift: f64| -> Result<f64> {
        // int_a^b (w r^shift)^theta dr on a log-uniform grid
        let n = (((b / a).log2() * ppo as f64).ceil() as usize).max(1);
        let du = (b / a).ln() / n as f64;
        let mut vals = Vec::with_capacity(n + 1);
        let mut meas = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let r = (a.ln() + k as f64 * du).exp().clamp(a, b);
            vals.push(w.eval(r)? * r.powf(shift));
            meas.push(r);
        }
        Ok(super::radial_grid::log_trapezoid_norm(&vals, &meas, du, theta, 0, n))
    };
    let first = rs[0];
    let last = *rs.last().unwrap();
    // Tail: partial norms over [t0, t0 2^k] for t0 the first interior octave.
    let t0 = (lo + 1.0).ceil().exp2();
    let mut tails = Vec::new();
    let mut b = t0 * 2.0;
    while b <= last * (1.0 + 1e-12) {
        tails.push(partial(t0, b, 0.0)?);
        b *= 2.0;
    }
    let grows = |seq: &[f64]| -> bool {
        let k = seq.len();
        k >= 4 && seq[k - 1] >= 2.0 * seq[k - 4]
    };
    let tail_ok = !grows(&tails);
    let t1 = (hi - 1.0).floor().exp2();
    let mut heads = Vec::new();
    let mut a = t1 / 2.0;
    while a >= first * (1.0 - 1e-12) {
        heads.push(partial(a, t1, big_p)?);
        a /= 2.0;
    }
    let head_ok = !grows(&heads);
    let mut est = Vec::new();
    for &t in TEST_RADII.iter() {
        if t <= first || t >= last {
            continue;
        }
        let tail = if tail_ok { partial(t, last, 0.0)? } else { f64::INFINITY };
        let head = if head_ok { partial(first, t, big_p)? } else { f64::INFINITY };
        est.push(TailEstimate { t, tail, head });
    }
    Ok((tail_ok, head_ok, est))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64) -> MixedExponent {
        MixedExponent::new(vec![v]).unwrap()
    }

    #[test]
    fn inverse_weight_borderline() {
        let rep = omega_check(&RadialWeight::Power { exponent: -1.0 }, 2.0, &p(2.0)).unwrap();
        assert!(rep.in_omega_theta);
        assert!(!rep.in_omega_p_theta);
        assert_eq!(rep.verdict, AdmissibilityVerdict::FZeroForced);
        // ||r^-1||_{L_2(t, inf)} = t^{-1/2}
        let e = &rep.tail_norm_estimates[2];
        assert!((e.tail - 1.0).abs() < 1e-14);
        assert!(e.head.is_infinite());
    }

    #[test]
    fn morrey_weight_admissible() {
        let rep = omega_check(&RadialWeight::morrey(0.25, 2.0), 2.0, &p(2.0)).unwrap();
        assert!(rep.in_omega_p_theta);
        assert_eq!(rep.verdict, AdmissibilityVerdict::Admissible);
    }

    #[test]
    fn constant_weight_trivial() {
        let rep = omega_check(&RadialWeight::Power { exponent: 0.0 }, 2.0, &p(2.0)).unwrap();
        assert_eq!(rep.verdict, AdmissibilityVerdict::TrivialSpace);
        assert!(!rep.in_omega_theta);
    }

    #[test]
    fn infinite_theta_rules() {
        let rep = omega_check(&RadialWeight::Power { exponent: 0.0 }, f64::INFINITY, &p(2.0)).unwrap();
        assert_eq!(rep.verdict, AdmissibilityVerdict::Admissible);
        let rep = omega_check(&RadialWeight::Power { exponent: -0.6 }, f64::INFINITY, &p(2.0)).unwrap();
        assert_eq!(rep.verdict, AdmissibilityVerdict::FZeroForced);
    }

    #[test]
    fn table_matches_power_verdicts() {
        let rs: Vec<f64> = (-30..=30).map(|k| (k as f64 * 0.5).exp2()).collect();
        for (a, expect) in [
            (-0.75, AdmissibilityVerdict::Admissible),
            (0.0, AdmissibilityVerdict::TrivialSpace),
            (-1.5, AdmissibilityVerdict::FZeroForced),
        ] {
            let w = RadialWeight::Table { r: rs.clone(), w: rs.iter().map(|r| r.powf(a)).collect() };
            let rep = omega_check(&w, 2.0, &p(2.0)).unwrap();
            assert_eq!(rep.verdict, expect, "exponent {a}");
        }
    }

    #[test]
    fn piecewise_uses_low_near_zero_and_high_in_tail() {
        let w = RadialWeight::PiecewisePower { breakpoint: 1.0, low: 0.0, high: -1.0, scale: 1.0 };
        let rep = omega_check(&w, 2.0, &p(2.0)).unwrap();
        assert_eq!(rep.verdict, AdmissibilityVerdict::Admissible);
        let w = RadialWeight::PiecewisePower { breakpoint: 1.0, low: -1.0, high: 0.0, scale: 1.0 };
        let rep = omega_check(&w, 2.0, &p(2.0)).unwrap();
        assert_eq!(rep.verdict, AdmissibilityVerdict::TrivialSpace);
    }

    #[test]
    fn table_rejects_outside_and_nonpositive() {
        let w = RadialWeight::Table { r: vec![1.0, 2.0], w: vec![1.0, 0.5] };
        assert!(w.eval(3.0).is_err());
        assert!((w.eval(1.5).unwrap() - 1.5f64.powf(-1.0)).abs() < 1e-12);
        let bad = RadialWeight::Table { r: vec![1.0, 2.0], w: vec![1.0, 0.0] };
        assert!(omega_check(&bad, 2.0, &p(2.0)).is_err());
    }

    #[test]
    fn hat_weights() {
        let (v1, v2) = derive_hat_weights(&RadialWeight::morrey(0.25, 2.0), &p(2.0));
        assert_eq!(v1, RadialWeight::Power { exponent: -0.25 - 0.5 - 1.5 });
        assert_eq!(v2, RadialWeight::Power { exponent: -0.25 - 0.5 - 0.5 });
        let (v1, v2) = derive_hat_weights(&RadialWeight::Power { exponent: 0.0 }, &p(f64::INFINITY));
        assert_eq!(v1, RadialWeight::Power { exponent: -1.0 });
        assert_eq!(v2, RadialWeight::Power { exponent: 0.0 });
        let t = RadialWeight::Table { r: vec![1.0, 4.0], w: vec![2.0, 3.0] };
        let (v1, _) = derive_hat_weights(&t, &p(2.0));
        match v1 {
            RadialWeight::Table { w, .. } => {
                assert!((w[0] - 2.0).abs() < 1e-15);
                assert!((w[1] - 3.0 * 4f64.powf(-1.5)).abs() < 1e-15);
            }
            _ => panic!("table expected"),
        }
    }

    #[test]
    fn piecewise_shift_consistent() {
        let w = RadialWeight::PiecewisePower { breakpoint: 2.0, low: 0.5, high: -1.0, scale: 3.0 };
        let s = w.shifted(-0.7);
        for r in [0.3, 1.0, 2.0, 5.0] {
            let a = w.eval(r).unwrap() * r.powf(-0.7);
            assert!((s.eval(r).unwrap() - a).abs() < 1e-12 * a.max(1.0));
        }
    }
}
