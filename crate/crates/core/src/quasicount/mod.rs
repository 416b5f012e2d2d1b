//! Counting maximal near perfect matchings in quasirandom bipartite graphs:
//! the phased greedy counter, its closed-form product bound, and the
//! resulting `n ln(pn)` sandwich.

mod greedy;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub use greedy::{greedy_count_bipartite, typical_vertices, GreedyTrace, PhaseRecord};

/// Slack for flooring quantities that are integers up to rounding.
const FLOOR_SLACK: f64 = 1e-9;

/// Phase schedule for a side of `n` vertices at density `p`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub n: usize,
    pub p: f64,
    pub eps: f64,
    /// `√ε / p`.
    pub delta: f64,
    /// `1 / ((1 − δ) p)`.
    pub c: f64,
    /// Main phases, `⌊1/√ε − c⌋` clamped at zero.
    pub k: usize,
    /// Tail phases, `⌊ln((1−δ)p) / ln(1 − (1−δ)p)⌋` clamped at zero.
    pub t: usize,
    /// Removals per main phase, `⌊√ε n⌋`.
    pub main_removals: usize,
}

impl PhasePlan {
    pub fn new(n: usize, p: f64, eps: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidPlan(format!("p = {p} is not in (0, 1]")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidPlan(format!("eps = {eps} is not in (0, 1)")));
        }
        let root = eps.sqrt();
        let delta = root / p;
        if delta >= 1.0 {
            return Err(Error::InvalidPlan(format!(
                "delta = sqrt(eps)/p = {delta} is not below 1"
            )));
        }
        let q = (1.0 - delta) * p;
        let c = 1.0 / q;
        let k = (1.0 / root - c + FLOOR_SLACK).floor().max(0.0) as usize;
        let t = (q.ln() / (1.0 - q).ln() + FLOOR_SLACK).floor().max(0.0) as usize;
        Ok(PhasePlan {
            n,
            p,
            eps,
            delta,
            c,
            k,
            t,
            main_removals: (root * n as f64 + FLOOR_SLACK).floor() as usize,
        })
    }

    /// `(1 − δ) p`, the guaranteed fraction of a typical vertex's side
    /// that it sees.
    pub fn rate(&self) -> f64 {
        (1.0 - self.delta) * self.p
    }

    /// Nominal side size at the start of main phase `i` (1-based):
    /// `n (1 − (i−1)√ε)`.
    pub fn nominal_size(&self, i: usize) -> f64 {
        self.n as f64 * (1.0 - (i as f64 - 1.0) * self.eps.sqrt())
    }
}

/// `ln` of the product of falling factorials bounding the greedy count:
/// `Σ_{i<k} ln[A_i! / (A_i − √ε n)!] + Σ_{i<t} ln[(√ε n qⁱ)!]` with
/// `A_i = (1−δ)p(n − i√ε n)` and `q = 1 − (1−δ)p`, factorials taken as
/// `Γ(x + 1)`.
pub fn lemma_a1_lower_bound(n: usize, p: f64, eps: f64) -> Result<f64> {
    let plan = PhasePlan::new(n, p, eps)?;
    let nf = n as f64;
    let step = eps.sqrt() * nf;
    let rate = plan.rate();
    let mut total = 0.0;
    for i in 0..plan.k {
        let a = rate * (nf - i as f64 * step);
        if a - step < 0.0 {
            return Err(Error::InvalidPlan(format!(
                "main factor {i}: ({a} - {step})! has a negative argument"
            )));
        }
        total += ln_gamma(a + 1.0) - ln_gamma(a - step + 1.0);
    }
    // (1−δ)p c = 1, so the tail factorials are (√ε n qⁱ)!
    let q = 1.0 - rate;
    for i in 0..plan.t {
        total += ln_gamma(step * q.powi(i as i32) + 1.0);
    }
    Ok(total)
}

fn sandwich(n: usize, p: f64, eps: f64, scale: f64) -> Result<(f64, f64)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps = {eps} is not in (0, 1)")));
    }
    let pn = p * n as f64;
    if !(pn > 1.0) {
        return Err(Error::invalid(format!("p n = {pn} must exceed 1")));
    }
    let base = scale * n as f64 * pn.ln();
    let r = 3.0 * eps.sqrt();
    Ok(((1.0 - r) * base, (1.0 + r) * base))
}

/// `((1 − 3√ε) n ln(pn), (1 + 3√ε) n ln(pn))` for a bipartite pair with
/// sides of size `n`.
pub fn thm1_bounds(n: usize, p: f64, eps: f64) -> Result<(f64, f64)> {
    sandwich(n, p, eps, 1.0)
}

/// Half of [`thm1_bounds`]: the same sandwich for a quasirandom graph on
/// `n` vertices.
pub fn thm1q_bounds(n: usize, p: f64, eps: f64) -> Result<(f64, f64)> {
    sandwich(n, p, eps, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_parameters() {
        let plan = PhasePlan::new(5000, 0.5, 0.04).unwrap();
        assert!((plan.delta - 0.4).abs() < 1e-12);
        assert!((plan.c - 1.0 / 0.3).abs() < 1e-12);
        // 1/0.2 - 3.33 = 1.67
        assert_eq!(plan.k, 1);
        // ln 0.3 / ln 0.7 = 3.38
        assert_eq!(plan.t, 3);
        assert_eq!(plan.main_removals, 1000);
    }

    #[test]
    fn invalid_plan() {
        assert!(matches!(
            PhasePlan::new(100, 0.1, 0.04),
            Err(Error::InvalidPlan(_))
        ));
        assert!(matches!(
            lemma_a1_lower_bound(100, 0.2, 0.04),
            Err(Error::InvalidPlan(_))
        ));
        assert!(PhasePlan::new(100, 0.5, 0.0).is_err());
    }

    #[test]
    fn thm1_arithmetic() {
        let (lo, hi) = thm1_bounds(1000, 0.5, 0.04).unwrap();
        assert!((lo - 0.4 * 1000.0 * 500f64.ln()).abs() < 1e-9);
        assert!((hi - 1.6 * 1000.0 * 500f64.ln()).abs() < 1e-9);
        let (qlo, qhi) = thm1q_bounds(1000, 0.5, 0.04).unwrap();
        assert_eq!((qlo * 2.0, qhi * 2.0), (lo, hi));
        let (lo, _) = thm1_bounds(1000, 0.5, 0.25).unwrap();
        assert!(lo < 0.0);
        assert!(thm1_bounds(2, 0.5, 0.04).is_err());
    }

    #[test]
    fn phase_bound_at_reference_point() {
        let v = lemma_a1_lower_bound(10_000, 0.5, 0.04).unwrap();
        assert!(v > 0.4 * 1e4 * 5000f64.ln());
    }

    #[test]
    fn phase_bound_approaches_n_ln_n_for_p_one() {
        let ratio =
            |n: usize| lemma_a1_lower_bound(n, 1.0, 1e-4).unwrap() / (n as f64 * (n as f64).ln());
        let (a, b, c) = (ratio(1_000), ratio(10_000), ratio(100_000));
        assert!(a < b && b < c && c < 1.0, "{a} {b} {c}");
        assert!(c > 0.85);
    }
}
