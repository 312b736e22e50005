//! Closed-form competitive-ratio, variance and large-budget bounds.

use statrs::function::gamma::ln_gamma;
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BoundsError {
    #[error("bad parameters: {0}")]
    BadParams(String),
}

/// `(1 − e^{−αΔ})/Δ`, the guarantee of SAMP(α) and ATT(α).
pub fn cr_lower(alpha: f64, delta: usize) -> Result<f64, BoundsError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(BoundsError::BadParams(format!("alpha must lie in [0,1], got {}", alpha)));
    }
    if delta == 0 {
        return Err(BoundsError::BadParams("sparsity must be at least 1".into()));
    }
    let d = delta as f64;
    Ok(-(-alpha * d).exp_m1() / d)
}

/// `Δ − 1 + 1/Δ`, the LP value per unit of the hardness construction.
fn hardness_x(delta: usize) -> f64 {
    let d = delta as f64;
    d - 1.0 + 1.0 / d
}

/// `(1 − e^{−x})/x` at `x = Δ − 1 + 1/Δ`: no online algorithm beats this.
/// `NaN` for `Δ = 0`.
pub fn cr_upper(delta: usize) -> f64 {
    if delta == 0 {
        return f64::NAN;
    }
    let x = hardness_x(delta);
    -(-x).exp_m1() / x
}

/// Below this, `g` is evaluated from its power series.
const SERIES_CUTOFF: f64 = 0.5;

/// Variance envelope `g(x) = (1 − e^{−2x} − 2x e^{−x}) / x²`, with `g(0) = 0`.
pub fn g(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if x < SERIES_CUTOFF {
        // Σ_{n≥3} (−1)^{n+1} (2ⁿ − 2n) x^{n−2} / n!
        let mut sum = 0.0;
        let mut pow2 = 4.0;
        let mut xp = 1.0;
        let mut fact = 2.0;
        let mut sign = 1.0;
        for n in 3..40 {
            pow2 *= 2.0;
            xp *= x;
            fact *= n as f64;
            let term = sign * (pow2 - 2.0 * n as f64) * xp / fact;
            sum += term;
            if term.abs() < 1e-18 * sum.abs() {
                break;
            }
            sign = -sign;
        }
        sum
    } else {
        (1.0 - (-2.0 * x).exp() - 2.0 * x * (-x).exp()) / (x * x)
    }
}

/// Sign-carrying part of `g′`: `g′(x) = h(x)/x³`.
fn g_prime_numerator(x: f64) -> f64 {
    let n = 1.0 - (-2.0 * x).exp() - 2.0 * x * (-x).exp();
    let dn = 2.0 * (-2.0 * x).exp() - 2.0 * (-x).exp() + 2.0 * x * (-x).exp();
    dn * x - 2.0 * n
}

pub fn g_prime(x: f64) -> f64 {
    g_prime_numerator(x) / (x * x * x)
}

/// Maximizer `η` of `g`, by bisection on `g′` over `[0.5, 2]`.
pub fn find_eta(tol: f64) -> f64 {
    let (mut lo, mut hi) = (0.5, 2.0);
    while hi - lo > tol.max(f64::EPSILON) {
        let mid = 0.5 * (lo + hi);
        if g_prime_numerator(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariancePolicy {
    Samp,
    Att,
}

/// Slack `c` in the `+ c·T` term of [`variance_bound`]. Fitted once on the
/// variance worst-case instances and frozen.
pub const DEFAULT_SLACK: f64 = 2.0;

/// `(αT)² g(min(Δα, η)) + cT` for SAMP and `(αT)² g(αΔ) + cT` for ATT.
pub fn variance_bound(policy: VariancePolicy, alpha: f64, delta: usize, horizon: usize, slack_c: f64) -> f64 {
    let ad = alpha * delta as f64;
    let arg = match policy {
        VariancePolicy::Samp => ad.min(find_eta(1e-12)),
        VariancePolicy::Att => ad,
    };
    let at = alpha * horizon as f64;
    at * at * g(arg) + slack_c * horizon as f64
}

/// `(√2, 2√2]`, the known range of the large-budget constant.
pub fn kappa_bracket() -> (f64, f64) {
    (SQRT_2, 2.0 * SQRT_2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BoundValue {
    Point(f64),
    Bracket { lower: f64, upper: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub name: String,
    pub inputs: Vec<(String, f64)>,
    pub value: BoundValue,
    pub note: String,
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            BoundValue::Point(v) => write!(f, "{} {:.6}", self.name, v)?,
            BoundValue::Bracket { lower, upper } => write!(f, "{} [{:.6}, {:.6}]", self.name, lower, upper)?,
        }
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

/// Large-budget ratio: `1 − 1/√(2πB)` for `Δ = 1`, otherwise the bracket
/// `[1 − 2√2·s, 1 − √2·s]` with `s = √(ln Δ / B)`. Both drop `1 + o(1)`
/// factors.
pub fn large_budget_ratio(delta: usize, budget: u64) -> Result<BoundReport, BoundsError> {
    if delta == 0 || budget == 0 {
        return Err(BoundsError::BadParams("delta and B must be positive".into()));
    }
    let b = budget as f64;
    let inputs = vec![("delta".to_string(), delta as f64), ("B".to_string(), b)];
    if delta == 1 {
        let note = if budget < 30 {
            "asymptotic in B; exact small-B value differs".to_string()
        } else {
            "asymptotic in B".to_string()
        };
        return Ok(BoundReport {
            name: "large_budget_ratio".into(),
            inputs,
            value: BoundValue::Point(1.0 - 1.0 / (2.0 * PI * b).sqrt()),
            note,
        });
    }
    let s = ((delta as f64).ln() / b).sqrt();
    let (k_lo, k_hi) = kappa_bracket();
    Ok(BoundReport {
        name: "large_budget_ratio".into(),
        inputs,
        value: BoundValue::Bracket {
            lower: 1.0 - k_hi * s,
            upper: 1.0 - k_lo * s,
        },
        note: "endpoints asymptotic in delta and B".into(),
    })
}

/// `Pr[Pois(λ) ≤ k]`; terms in log space for `λ > 50`.
pub fn pois_le(lambda: f64, k: u64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda <= 50.0 {
        let mut term = (-lambda).exp();
        let mut sum = term;
        for l in 1..=k {
            term *= lambda / l as f64;
            sum += term;
            if term < 1e-300 && l as f64 > lambda {
                break;
            }
        }
        return sum.min(1.0);
    }
    let ln_lambda = lambda.ln();
    let log_term = |l: u64| -lambda + l as f64 * ln_lambda - ln_gamma(l as f64 + 1.0);
    // Largest term sits at min(k, ⌊λ⌋).
    let peak = log_term(k.min(lambda.floor() as u64));
    let mut sum = 0.0;
    for l in (0..=k).rev() {
        let w = (log_term(l) - peak).exp();
        sum += w;
        if w < 1e-18 * sum && (l as f64) < lambda {
            break;
        }
    }
    (peak.exp() * sum).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cr_lower_values() {
        assert!((cr_lower(1.0, 1).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(cr_lower(0.0, 4).unwrap(), 0.0);
        assert!((cr_lower(1.0, 2).unwrap() - 0.432_332_358).abs() < 1e-9);
        assert!(cr_lower(1.5, 2).is_err());
        assert!(cr_lower(1.0, 0).is_err());
    }

    #[test]
    fn cr_upper_values() {
        assert!((cr_upper(1) - cr_lower(1.0, 1).unwrap()).abs() < 1e-15);
        // x = 7/3 and x = 99.01 evaluated independently.
        assert!((cr_upper(3) - 0.387_012).abs() < 1e-6);
        assert!((cr_upper(100) - 0.010_100_0).abs() < 1e-7);
        assert!(cr_upper(0).is_nan());
    }

    #[test]
    fn g_values() {
        assert_eq!(g(0.0), 0.0);
        assert!((g(1.0) - 0.128_906).abs() < 1e-6);
        // Series and closed form agree where they meet.
        let a = g(SERIES_CUTOFF - 1e-12);
        let b = (1.0 - (-2.0 * SERIES_CUTOFF).exp() - 2.0 * SERIES_CUTOFF * (-SERIES_CUTOFF).exp())
            / (SERIES_CUTOFF * SERIES_CUTOFF);
        assert!((a - b).abs() < 1e-12);
        let x = 1e-3;
        assert!((g(x) - (x / 3.0 - x * x / 3.0 + 11.0 * x * x * x / 60.0)).abs() < 1e-13);
    }

    #[test]
    fn eta_is_the_maximizer() {
        let eta = find_eta(1e-10);
        assert!((eta - 1.126_501).abs() < 1e-5);
        assert!(g_prime(eta).abs() < 1e-8);
    }

    #[test]
    fn variance_bound_examples() {
        let v = variance_bound(VariancePolicy::Samp, 1.0, 1, 1000, 0.0);
        assert!((v - 1e6 * g(1.0)).abs() < 1e-6);
        assert!((v - 128_906.25).abs() < 0.5);
        let a = variance_bound(VariancePolicy::Att, 1.0, 2, 1000, 0.0);
        assert!((a - 110_085.8).abs() < 0.1);
        let s3 = variance_bound(VariancePolicy::Samp, 1.0, 3, 1000, 0.0);
        assert!((s3 - 1e6 * g(find_eta(1e-12))).abs() < 1e-6);
        assert_eq!(variance_bound(VariancePolicy::Att, 0.5, 2, 10, 2.0), 25.0 * g(1.0) + 20.0);
    }

    #[test]
    fn large_budget_examples() {
        let r = large_budget_ratio(1, 100).unwrap();
        assert!(matches!(r.value, BoundValue::Point(v) if (v - 0.960_106).abs() < 1e-6));
        let r = large_budget_ratio(1, 1).unwrap();
        assert!(matches!(r.value, BoundValue::Point(v) if (v - 0.601_058).abs() < 1e-6));
        assert!(r.note.contains("small-B"));
        let r = large_budget_ratio(64, 2048).unwrap();
        let BoundValue::Bracket { lower, upper } = r.value else { panic!() };
        assert!((lower - 0.872_541_6).abs() < 1e-6);
        assert!((upper - 0.936_270_8).abs() < 1e-6);
        assert!(large_budget_ratio(0, 3).is_err());
    }

    #[test]
    fn pois_le_values() {
        assert_eq!(pois_le(0.0, 3), 1.0);
        assert!((pois_le(1.0, 0) - (-1.0f64).exp()).abs() < 1e-15);
        // Independent summation at 50 digits gives 0.4867012...
        assert!((pois_le(100.0, 99) - 0.486_701_2).abs() < 1e-6);
        // Both branches agree across the switch.
        let direct: f64 = (0..=60u64).map(|l| (-50.0f64 + l as f64 * 50f64.ln() - ln_gamma(l as f64 + 1.0)).exp()).sum();
        assert!((pois_le(50.0, 60) - direct).abs() < 1e-12);
        assert!((pois_le(50.000001, 60) - direct).abs() < 1e-6);
    }
}
