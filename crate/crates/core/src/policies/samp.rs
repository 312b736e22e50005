use super::{Action, Decision, PolicyError};
use crate::instance::Topology;
use rand::Rng;

/// Mass above 1 tolerated (and renormalized away) from LP round-off.
const MASS_SLACK: f64 = 1e-9;

/// Per-agent sampling law `e ↦ α x*_e / r_j` as cumulative sums.
#[derive(Clone, Debug, PartialEq)]
pub struct SampTable {
    alpha: f64,
    cumulative: Vec<Vec<(usize, f64)>>,
    rate_zero: Vec<bool>,
}

impl SampTable {
    pub fn new(topo: &Topology, x_star: &[f64], alpha: f64) -> Result<SampTable, PolicyError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(PolicyError::BadAlpha(alpha));
        }
        if x_star.len() != topo.n_edges() {
            return Err(PolicyError::DimensionMismatch {
                expected: topo.n_edges(),
                got: x_star.len(),
            });
        }
        let mut cumulative = Vec::with_capacity(topo.n_agents());
        let mut rate_zero = Vec::with_capacity(topo.n_agents());
        for (j, edges) in topo.edges_of_agent.iter().enumerate() {
            let r = topo.rates[j];
            rate_zero.push(r <= 0.0);
            if r <= 0.0 {
                cumulative.push(Vec::new());
                continue;
            }
            let probs: Vec<f64> = edges.iter().map(|&e| alpha * x_star[e].max(0.0) / r).collect();
            let mass: f64 = probs.iter().sum();
            if mass > 1.0 + MASS_SLACK {
                return Err(PolicyError::MassExceeded { agent: j, mass });
            }
            let scale = if mass > 1.0 { 1.0 / mass } else { 1.0 };
            let mut acc = 0.0;
            cumulative.push(
                edges
                    .iter()
                    .zip(probs)
                    .map(|(&e, p)| {
                        acc += p * scale;
                        (e, acc)
                    })
                    .collect(),
            );
        }
        Ok(SampTable {
            alpha,
            cumulative,
            rate_zero,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Probability that agent `j`'s sampling step returns edge `e`.
    pub fn prob(&self, j: usize, e: usize) -> f64 {
        let mut prev = 0.0;
        for &(f, c) in &self.cumulative[j] {
            if f == e {
                return c - prev;
            }
            prev = c;
        }
        0.0
    }

    /// Total sampling mass of agent `j`.
    pub fn mass(&self, j: usize) -> f64 {
        self.cumulative[j].last().map_or(0.0, |&(_, c)| c)
    }

    /// `(edge, probability)` pairs of agent `j`.
    pub fn law(&self, j: usize) -> Vec<(usize, f64)> {
        let mut prev = 0.0;
        self.cumulative[j]
            .iter()
            .map(|&(e, c)| {
                let p = c - prev;
                prev = c;
                (e, p)
            })
            .collect()
    }

    /// Sampled edge for uniform `u`, or `None` for the leftover mass.
    pub fn sample(&self, j: usize, u: f64) -> Result<Option<usize>, PolicyError> {
        if self.rate_zero[j] {
            return Err(PolicyError::RateZero { agent: j });
        }
        Ok(self.cumulative[j].iter().find(|&&(_, c)| u < c).map(|&(e, _)| e))
    }
}

pub fn samp_decide<R: Rng>(
    topo: &Topology,
    table: &SampTable,
    j: usize,
    remaining: &[u32],
    rng: &mut R,
) -> Result<Decision, PolicyError> {
    let sampled = table.sample(j, rng.random::<f64>())?;
    let action = match sampled {
        Some(e) if topo.is_safe(e, remaining) => Action::Attempt(e),
        _ => Action::Reject,
    };
    Ok(Decision {
        action,
        sampled,
        coin: None,
    })
}
