//! Online decision rules. Every rule only ever proposes edges that are safe
//! under the current budgets; the engine re-checks.

mod att;
mod baseline;
mod samp;

pub use att::{att_decide, att_precompute, AttenuationTable, AttPolicy, DEFAULT_CELL_CAP, DEFAULT_REPLICAS, MIN_REPLICAS};
pub use baseline::{baseline_decide, random_rank, BaselineKind};
pub use samp::{samp_decide, SampTable};

use crate::instance::Topology;
use rand::Rng;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("agent {agent} arrived but has zero arrival rate")]
    RateZero { agent: usize },
    #[error("replica count {0} is below the minimum {MIN_REPLICAS}")]
    BadReplicaCount(usize),
    #[error("alpha must lie in [0,1], got {0}")]
    BadAlpha(f64),
    #[error("alpha·Δ = {0} exceeds the horizon {1}")]
    HorizonTooShort(f64, usize),
    #[error("sampling mass of agent {agent} is {mass} > 1")]
    MassExceeded { agent: usize, mass: f64 },
    #[error("LP solution has {got} entries for {expected} edges")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("attenuation table needs {cells} cells, cap is {cap}")]
    TableTooLarge { cells: usize, cap: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Reject,
    Attempt(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decision {
    pub action: Action,
    /// Edge drawn by the sampling step, kept even when it is then rejected.
    pub sampled: Option<usize>,
    /// Attenuation coin, when one was drawn.
    pub coin: Option<bool>,
}

impl Decision {
    pub const REJECT: Decision = Decision {
        action: Action::Reject,
        sampled: None,
        coin: None,
    };

    pub fn attempt(e: usize) -> Decision {
        Decision {
            action: Action::Attempt(e),
            sampled: None,
            coin: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Samp,
    Att,
    Greedy,
    Ranking,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Samp => "samp",
            PolicyKind::Att => "att",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Ranking => "ranking",
        }
    }

    pub fn needs_lp(self) -> bool {
        matches!(self, PolicyKind::Samp | PolicyKind::Att)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "samp" => Ok(PolicyKind::Samp),
            "att" => Ok(PolicyKind::Att),
            "greedy" => Ok(PolicyKind::Greedy),
            "ranking" => Ok(PolicyKind::Ranking),
            _ => Err(format!("unknown policy {:?} (expected samp, att, greedy or ranking)", s)),
        }
    }
}

/// A ready-to-run policy with all its offline inputs.
#[derive(Clone, Debug)]
pub enum Policy {
    Samp(SampTable),
    Att(AttPolicy),
    Baseline(BaselineKind),
    /// Rejects every arrival.
    Reject,
}

/// Per-episode policy state.
#[derive(Clone, Debug, Default)]
pub struct EpisodeState {
    /// Offline vertex ranks (Ranking only).
    pub rank: Vec<usize>,
    /// Coins clamped because `γ_t > β̂_{e,t}` (ATT only).
    pub clamped_coins: u64,
}

impl Policy {
    pub fn label(&self) -> &'static str {
        match self {
            Policy::Samp(_) => "samp",
            Policy::Att(_) => "att",
            Policy::Baseline(BaselineKind::Greedy) => "greedy",
            Policy::Baseline(BaselineKind::Ranking) => "ranking",
            Policy::Reject => "reject",
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            Policy::Samp(s) => Some(s.alpha()),
            Policy::Att(a) => Some(a.samp.alpha()),
            _ => None,
        }
    }

    pub fn begin_episode<R: Rng>(&self, topo: &Topology, rng: &mut R) -> EpisodeState {
        let rank = match self {
            Policy::Baseline(BaselineKind::Ranking) => random_rank(topo, rng),
            _ => Vec::new(),
        };
        EpisodeState {
            rank,
            clamped_coins: 0,
        }
    }

    /// Decision for arrival `j` at round `t` (1-based).
    pub fn decide<R: Rng>(
        &self,
        topo: &Topology,
        t: usize,
        j: usize,
        remaining: &[u32],
        state: &mut EpisodeState,
        rng: &mut R,
    ) -> Result<Decision, PolicyError> {
        match self {
            Policy::Samp(s) => samp_decide(topo, s, j, remaining, rng),
            Policy::Att(a) => {
                let d = att_decide(topo, a, t, j, remaining, rng)?;
                if let Some(e) = d.sampled {
                    if d.coin.is_some() && a.table.clamped(e, t) {
                        state.clamped_coins += 1;
                    }
                }
                Ok(d)
            }
            Policy::Baseline(kind) => Ok(baseline_decide(*kind, topo, j, remaining, &state.rank)),
            Policy::Reject => Ok(Decision::REJECT),
        }
    }
}
