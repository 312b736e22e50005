use super::OracleError;
use crate::rng::{stream, Domain};
use crate::stats::{mean_ci, CompensatedSum};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `Δ` bins of capacity `B`; each of `T` rounds lands in a given bin with
/// probability `B/T` and misses all of them with probability `1 − ΔB/T`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BbParams {
    pub delta: usize,
    pub b: u32,
    pub t: u64,
}

impl BbParams {
    pub fn new(delta: usize, b: u32, t: u64) -> Result<BbParams, OracleError> {
        let p = BbParams { delta, b, t };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<(), OracleError> {
        if self.delta == 0 || self.b == 0 || self.t == 0 {
            return Err(OracleError::BadParams("delta, B and T must be positive".into()));
        }
        if (self.delta as u128) * (self.b as u128) > self.t as u128 {
            return Err(OracleError::BadParams(format!(
                "delta*B = {} exceeds T = {}",
                self.delta as u128 * self.b as u128,
                self.t
            )));
        }
        Ok(())
    }

    pub fn hit(&self) -> f64 {
        self.b as f64 / self.t as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum BbMethod {
    Exact,
    Mc { samples: usize, seed: u64 },
}

impl BbMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BbMethod::Exact => "exact",
            BbMethod::Mc { .. } => "mc",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BbEstimate {
    /// `E[T′]/T`.
    pub value: f64,
    /// 95% half-width; zero for the exact method.
    pub ci: f64,
    pub method: BbMethod,
    /// DP states used by the exact method, 0 for Monte Carlo.
    pub states: usize,
}

/// Sample count used when the exact DP does not fit.
pub const FALLBACK_SAMPLES: usize = 10_000;

/// `(1/T) Σ_{t=1..T} Pr[every bin ≤ B−1 after t−1 throws]` by a DP over the
/// joint bin counts. Configurations where a bin reached `B` are absorbing and
/// dropped, so only `B^Δ` live states are stored.
pub fn bbins_exact(params: BbParams, max_states: usize) -> Result<BbEstimate, OracleError> {
    params.check()?;
    let b = params.b as usize;
    let states = (0..params.delta).try_fold(1usize, |acc, _| acc.checked_mul(b).filter(|&s| s <= max_states));
    let Some(states) = states else {
        return Err(OracleError::StateSpaceExceeded {
            states: usize::MAX.min((b as f64).powi(params.delta as i32) as usize),
            cap: max_states,
        });
    };
    let hit = params.hit();
    let miss = 1.0 - params.delta as f64 * hit;
    // Mixed radix: bin k has stride b^k.
    let strides: Vec<usize> = (0..params.delta).map(|k| b.pow(k as u32)).collect();
    let mut cur = vec![0.0f64; states];
    let mut next = vec![0.0f64; states];
    cur[0] = 1.0;
    let mut total = CompensatedSum::default();
    for _ in 0..params.t {
        let alive: f64 = cur.iter().copied().collect::<CompensatedSum>().value();
        total.add(alive);
        if alive < 1e-300 {
            break;
        }
        for (s, slot) in next.iter_mut().enumerate() {
            let mut v = miss * cur[s];
            for &stride in &strides {
                if (s / stride) % b > 0 {
                    v += hit * cur[s - stride];
                }
            }
            *slot = v;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(BbEstimate {
        value: total.value() / params.t as f64,
        ci: 0.0,
        method: BbMethod::Exact,
        states,
    })
}

/// Rounds survived by one sample, capped at `T`.
///
/// Only hits move the counts, so the hits are simulated until a bin reaches
/// `B` and the misses before the `N`-th hit are drawn in one go as a
/// negative binomial (a Poisson with Gamma-distributed mean).
fn survival(params: BbParams, rng: &mut impl Rng) -> u64 {
    let mut counts = vec![0u32; params.delta];
    let mut hits = 0u64;
    loop {
        hits += 1;
        let k = rng.random_range(0..params.delta);
        counts[k] += 1;
        if counts[k] == params.b {
            break;
        }
    }
    let q = params.delta as f64 * params.hit();
    let misses = if q >= 1.0 {
        0
    } else {
        let lambda = Gamma::new(hits as f64, (1.0 - q) / q)
            .expect("positive shape and scale")
            .sample(rng);
        if lambda <= 0.0 {
            0
        } else if lambda >= params.t as f64 * 4.0 {
            params.t
        } else {
            Poisson::new(lambda).expect("positive mean").sample(rng) as u64
        }
    };
    (hits + misses).min(params.t)
}

/// Monte-Carlo `E[min(τ, T)]/T` where `τ` is the round of the first overflow.
pub fn bbins_mc(params: BbParams, samples: usize, seed: u64) -> Result<BbEstimate, OracleError> {
    params.check()?;
    if samples < 2 {
        return Err(OracleError::BadParams("need at least 2 samples".into()));
    }
    let t = params.t as f64;
    let values: Vec<f64> = (0..samples as u64)
        .into_par_iter()
        .map(|i| survival(params, &mut stream(seed, Domain::BallsAndBins, i)) as f64 / t)
        .collect();
    let ci = mean_ci(&values);
    Ok(BbEstimate {
        value: ci.mean,
        ci: ci.ci,
        method: BbMethod::Mc { samples, seed },
        states: 0,
    })
}

/// Estimate `E[T′]/T`; an exact request that does not fit in `max_states`
/// falls back to Monte Carlo with [`FALLBACK_SAMPLES`] samples and seed 0.
pub fn bbins_ratio(params: BbParams, method: BbMethod, max_states: usize) -> Result<BbEstimate, OracleError> {
    match method {
        BbMethod::Exact => match bbins_exact(params, max_states) {
            Err(OracleError::StateSpaceExceeded { .. }) => bbins_mc(params, FALLBACK_SAMPLES, 0),
            r => r,
        },
        BbMethod::Mc { samples, seed } => bbins_mc(params, samples, seed),
    }
}
