//! Numeric checks of the probabilistic lemmas behind the bounds.
//!
//! Each check scans a grid and reports the largest `lhs − rhs` of the
//! inequality it tests, so a check holds when `max_violation ≤ tol`.

use crate::bounds::{g, pois_le};
use crate::stats::{normal_cdf, CompensatedSum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use statrs::distribution::{Binomial, DiscreteCDF};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub cases: usize,
    pub max_violation: f64,
    /// Parameters of the worst case.
    pub worst: String,
}

impl LemmaCheck {
    fn new(name: &'static str) -> LemmaCheck {
        LemmaCheck {
            name,
            cases: 0,
            max_violation: f64::NEG_INFINITY,
            worst: String::new(),
        }
    }

    fn record(&mut self, violation: f64, case: impl FnOnce() -> String) {
        self.cases += 1;
        if violation > self.max_violation {
            self.max_violation = violation;
            self.worst = case();
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.cases > 0 && self.max_violation <= tol
    }
}

fn binomial(n: u64, p: f64) -> Binomial {
    Binomial::new(p, n).expect("p in [0,1]")
}

/// `Pr[Binom(t, αB/T) ≥ B]` is largest at `B = 1` among `B ∈ 1..=b_max`.
pub fn binomial_overflow_check(alphas: &[f64], t_fracs: &[f64], b_max: u32, horizon: u64) -> LemmaCheck {
    let mut c = LemmaCheck::new("binomial overflow maximal at B=1");
    for &alpha in alphas {
        for &frac in t_fracs {
            let t = ((frac * horizon as f64).round() as u64).min(horizon);
            let at_one = binomial(t, alpha / horizon as f64).sf(0);
            for b in 2..=b_max {
                let q = alpha * b as f64 / horizon as f64;
                if q > 1.0 {
                    continue;
                }
                let v = binomial(t, q).sf(b as u64 - 1) - at_one;
                c.record(v, || format!("alpha={alpha} t={t} T={horizon} B={b}"));
            }
        }
    }
    c
}

/// `Pr[Pois(B) ≤ B−1]` is non-decreasing over `B = 1..=b_max`.
pub fn poisson_monotone_check(b_max: u64) -> LemmaCheck {
    let mut c = LemmaCheck::new("Pr[Pois(B) <= B-1] non-decreasing");
    let mut prev = pois_le(1.0, 0);
    for b in 2..=b_max {
        let cur = pois_le(b as f64, b - 1);
        c.record(prev - cur, || format!("B={b}"));
        prev = cur;
    }
    c
}

/// Slud: `Pr[Binom(n,p) ≤ k−1] ≤ Φ((k − np)/√(np(1−p)))` for `p ≤ 1/4`,
/// `np ≤ k ≤ n`.
pub fn slud_check(n_max: u64, p_steps: usize) -> LemmaCheck {
    let mut c = LemmaCheck::new("Slud lower tail");
    for n in 1..=n_max {
        for i in 1..=p_steps {
            let p = 0.25 * i as f64 / p_steps as f64;
            let mean = n as f64 * p;
            let sd = (mean * (1.0 - p)).sqrt();
            let dist = binomial(n, p);
            for k in (mean.ceil() as u64).max(1)..=n {
                let lhs = dist.cdf(k - 1);
                let rhs = normal_cdf((k as f64 - mean) / sd);
                c.record(lhs - rhs, || format!("n={n} p={p} k={k}"));
            }
        }
    }
    c
}

/// `Pr[max load ≥ B]` for `m` balls in `n` bins, exactly:
/// `1 − m!/nᵐ · [xᵐ] (Σ_{i<B} xⁱ/i!)ⁿ`.
pub fn multinomial_overflow(n: u32, m: u32, b: u32) -> f64 {
    let m = m as usize;
    let mut fact = vec![BigRational::one()];
    for i in 1..=m.max(b as usize) {
        let last = fact[i - 1].clone();
        fact.push(last * BigRational::from_integer(BigInt::from(i)));
    }
    let base: Vec<BigRational> = (0..(b as usize).min(m + 1)).map(|i| fact[i].recip()).collect();
    let mut poly = vec![BigRational::one()];
    for _ in 0..n {
        let mut next = vec![BigRational::zero(); (poly.len() + base.len() - 1).min(m + 1)];
        for (i, a) in poly.iter().enumerate() {
            for (j, c) in base.iter().enumerate() {
                if i + j <= m {
                    next[i + j] += a * c;
                }
            }
        }
        poly = next;
    }
    let coef = poly.get(m).cloned().unwrap_or_else(BigRational::zero);
    let n_pow = BigRational::from_integer(BigInt::from(n).pow(m as u32));
    let fit = coef * fact[m].clone() / n_pow;
    (BigRational::one() - fit).to_f64().unwrap_or(f64::NAN)
}

/// `Pr[max load ≥ B]` under independent `Pois(m/n)` loads.
pub fn poisson_overflow(n: u32, m: u32, b: u32) -> f64 {
    1.0 - pois_le(m as f64 / n as f64, b as u64 - 1).powi(n as i32)
}

/// Exact multinomial overflow is at most twice its Poisson counterpart.
pub fn poisson_factor2_check(n_max: u32, m_max: u32, b_max: u32) -> LemmaCheck {
    let mut c = LemmaCheck::new("multinomial overflow <= 2 * Poisson overflow");
    for n in 1..=n_max {
        for m in 1..=m_max {
            for b in 1..=b_max {
                let v = multinomial_overflow(n, m, b) - 2.0 * poisson_overflow(n, m, b);
                c.record(v, || format!("n={n} m={m} B={b}"));
            }
        }
    }
    c
}

/// Distribution of `Binom(t, q)` restricted to `0..cap`, advanced a throw at a time.
struct TruncatedBinomial {
    pmf: Vec<f64>,
    q: f64,
}

impl TruncatedBinomial {
    fn new(cap: usize, q: f64) -> TruncatedBinomial {
        let mut pmf = vec![0.0; cap];
        pmf[0] = 1.0;
        TruncatedBinomial { pmf, q }
    }

    fn below(&self) -> f64 {
        self.pmf.iter().copied().collect::<CompensatedSum>().value()
    }

    fn step(&mut self) {
        for k in (0..self.pmf.len()).rev() {
            let carry = if k > 0 { self.pmf[k - 1] * self.q } else { 0.0 };
            self.pmf[k] = self.pmf[k] * (1.0 - self.q) + carry;
        }
    }
}

/// Wald for one bin: `E[min(S_T, B)]·T/B = Σ_{n=1..T} Pr[S_{n−1} ≤ B−1]`
/// with `S_n ~ Binom(n, B/T)`. Returns `(lhs, rhs)`.
pub fn wald_identity(b: u32, horizon: u64) -> (f64, f64) {
    let q = b as f64 / horizon as f64;
    let mut dist = TruncatedBinomial::new(b as usize, q);
    let mut rhs = CompensatedSum::default();
    for _ in 0..horizon {
        rhs.add(dist.below());
        dist.step();
    }
    let below: f64 = dist.below();
    let partial: f64 = dist.pmf.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let lhs = (partial + b as f64 * (1.0 - below)) * horizon as f64 / b as f64;
    (lhs, rhs.value())
}

pub fn wald_check(bs: &[u32], horizons: &[u64]) -> LemmaCheck {
    let mut c = LemmaCheck::new("Wald identity for a single bin");
    for &b in bs {
        for &t in horizons {
            if b as u64 > t {
                continue;
            }
            let (lhs, rhs) = wald_identity(b, t);
            c.record((lhs - rhs).abs() / rhs, || format!("B={b} T={t}"));
        }
    }
    c
}

/// `F_α(B) = Σ_t 2(t−1) p_t − (Σ_t p_t)²` with `p_t = Pr[Binom(t−1, αB/T) ≤ B−1]`.
pub fn f_alpha(alpha: f64, b: u32, horizon: u64) -> f64 {
    let mut dist = TruncatedBinomial::new(b as usize, alpha * b as f64 / horizon as f64);
    let mut first = CompensatedSum::default();
    let mut second = CompensatedSum::default();
    for t in 1..=horizon {
        let p = dist.below();
        first.add(2.0 * (t - 1) as f64 * p);
        second.add(p);
        dist.step();
    }
    first.value() - second.value() * second.value()
}

/// `F_α(B) ≤ T² g(α) + slack·T`.
pub fn f_alpha_check(alphas: &[f64], bs: &[u32], horizon: u64, slack: f64) -> LemmaCheck {
    let mut c = LemmaCheck::new("F_alpha(B) envelope");
    let t = horizon as f64;
    for &alpha in alphas {
        for &b in bs {
            if alpha * b as f64 > t {
                continue;
            }
            let v = f_alpha(alpha, b, horizon) - (t * t * g(alpha) + slack * t);
            c.record(v / (t * t), || format!("alpha={alpha} B={b} T={horizon}"));
        }
    }
    c
}
