//! Episode simulation and Monte-Carlo aggregation.

use crate::instance::Topology;
use crate::policies::{Action, AttPolicy, Policy, PolicyError};
use crate::rng::{self, Domain, StreamRng};
use crate::stats::{count_stats, mean_ci, CompensatedSum};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("policy attempted unsafe edge {edge} at round {round}")]
    SafetyViolation { round: usize, edge: usize },
    #[error("policy attempted edge {edge} which is not incident to arriving agent {agent}")]
    NotIncident { edge: usize, agent: usize },
    #[error("scripted arrivals have length {got}, horizon is {expected}")]
    BadScript { expected: usize, got: usize },
    #[error("need at least 2 episodes, got {0}")]
    TooFewEpisodes(usize),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AcceptedEdge {
    pub round: usize,
    pub edge: usize,
    pub outcome: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpisodeResult {
    pub total_utility: f64,
    /// Accepted assignments, including zero-cost and zero-utility outcomes.
    pub match_count: u64,
    /// Only filled when requested.
    pub accepted: Vec<AcceptedEdge>,
    pub final_ledger: Vec<u32>,
    pub stream: u64,
    pub clamped_coins: u64,
}

/// Where arrivals come from.
#[derive(Clone, Copy, Debug)]
pub enum Arrivals<'a> {
    Sampled,
    Scripted(&'a [usize]),
}

/// Run one episode on `rng`. `observe(t, remaining)` sees the ledger at the
/// start of every round `t = 1..=T`.
pub fn run_episode_with<F: FnMut(usize, &[u32])>(
    topo: &Topology,
    policy: &Policy,
    rng: &mut StreamRng,
    arrivals: Arrivals<'_>,
    record: bool,
    mut observe: F,
) -> Result<EpisodeResult, EngineError> {
    if let Arrivals::Scripted(s) = arrivals {
        if s.len() != topo.horizon {
            return Err(EngineError::BadScript {
                expected: topo.horizon,
                got: s.len(),
            });
        }
    }
    let mut remaining = topo.budgets.clone();
    let mut state = policy.begin_episode(topo, rng);
    let mut live = (0..topo.n_edges()).filter(|&e| topo.is_safe(e, &remaining)).count();
    let mut utility = CompensatedSum::default();
    let mut matches = 0u64;
    let mut accepted = Vec::new();

    for t in 1..=topo.horizon {
        observe(t, &remaining);
        if live == 0 {
            // Nothing can ever be attempted again.
            continue;
        }
        let j = match arrivals {
            Arrivals::Sampled => topo.arrival(rng.random::<f64>()),
            Arrivals::Scripted(s) => s[t - 1],
        };
        let d = policy.decide(topo, t, j, &remaining, &mut state, rng)?;
        let Action::Attempt(e) = d.action else {
            continue;
        };
        if topo.edge_agent[e] != j {
            return Err(EngineError::NotIncident { edge: e, agent: j });
        }
        if !topo.is_safe(e, &remaining) {
            return Err(EngineError::SafetyViolation { round: t, edge: e });
        }
        let o = topo.outcome(e, rng.random::<f64>());
        for &k in &topo.outcome_support[e][o] {
            remaining[k] = remaining[k]
                .checked_sub(1)
                .ok_or(EngineError::SafetyViolation { round: t, edge: e })?;
            if remaining[k] == 0 {
                live -= topo.edges_of_resource[k]
                    .iter()
                    .filter(|&&f| topo.support[f].iter().all(|&r| r == k || remaining[r] > 0))
                    .count();
            }
        }
        utility.add(topo.outcome_utility[e][o]);
        matches += 1;
        if record {
            accepted.push(AcceptedEdge {
                round: t,
                edge: e,
                outcome: o,
            });
        }
    }
    Ok(EpisodeResult {
        total_utility: utility.value(),
        match_count: matches,
        accepted,
        final_ledger: remaining,
        stream: 0,
        clamped_coins: state.clamped_coins,
    })
}

/// Episode `index` of the run keyed by `master_seed`.
pub fn run_episode(
    topo: &Topology,
    policy: &Policy,
    master_seed: u64,
    index: u64,
    record: bool,
) -> Result<EpisodeResult, EngineError> {
    let mut rng = rng::stream(master_seed, Domain::Episode, index);
    let mut r = run_episode_with(topo, policy, &mut rng, Arrivals::Sampled, record, |_, _| {})?;
    r.stream = index;
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerfEstimate {
    pub episodes: usize,
    pub mean_utility: f64,
    pub utility_ci: f64,
    pub utility_variance: f64,
    pub mean_matches: f64,
    pub matches_ci: f64,
    pub var_matches: f64,
    /// Jackknife 95% half-width of `var_matches`.
    pub var_ci: f64,
    /// Fraction of ATT table cells with `γ_t > β̂_{e,t}`.
    pub clamp_rate: Option<f64>,
    /// Clamped coins per episode (ATT only).
    pub clamped_coins_per_episode: Option<f64>,
}

/// Per-episode numbers kept by [`estimate_performance`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpisodeSummary {
    pub total_utility: f64,
    pub match_count: u64,
    pub clamped_coins: u64,
}

pub fn simulate_episodes(
    topo: &Topology,
    policy: &Policy,
    episodes: usize,
    master_seed: u64,
) -> Result<Vec<EpisodeSummary>, EngineError> {
    (0..episodes as u64)
        .into_par_iter()
        .map(|m| {
            run_episode(topo, policy, master_seed, m, false).map(|r| EpisodeSummary {
                total_utility: r.total_utility,
                match_count: r.match_count,
                clamped_coins: r.clamped_coins,
            })
        })
        .collect()
}

pub fn summarize(policy: &Policy, runs: &[EpisodeSummary]) -> PerfEstimate {
    let utilities: Vec<f64> = runs.iter().map(|r| r.total_utility).collect();
    let matches: Vec<u64> = runs.iter().map(|r| r.match_count).collect();
    let u = mean_ci(&utilities);
    let c = count_stats(&matches);
    let (clamp_rate, clamped) = match policy {
        Policy::Att(a) => (
            Some(a.table.clamp_rate()),
            Some(runs.iter().map(|r| r.clamped_coins).sum::<u64>() as f64 / runs.len().max(1) as f64),
        ),
        _ => (None, None),
    };
    PerfEstimate {
        episodes: runs.len(),
        mean_utility: u.mean,
        utility_ci: u.ci,
        utility_variance: u.variance,
        mean_matches: c.mean,
        matches_ci: c.mean_ci,
        var_matches: c.variance,
        var_ci: c.variance_ci,
        clamp_rate,
        clamped_coins_per_episode: clamped,
    }
}

/// `episodes` independent runs on streams `0..episodes`; identical inputs
/// give identical output for any thread count.
pub fn estimate_performance(
    topo: &Topology,
    policy: &Policy,
    episodes: usize,
    master_seed: u64,
) -> Result<PerfEstimate, EngineError> {
    if episodes < 2 {
        return Err(EngineError::TooFewEpisodes(episodes));
    }
    let runs = simulate_episodes(topo, policy, episodes, master_seed)?;
    Ok(summarize(policy, &runs))
}

/// Observed rate of `edge safe ∧ Z_{edge,t} = 1` under ATT.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EligibilityRate {
    pub round: usize,
    pub rate: f64,
    /// Binomial standard error of `rate`.
    pub sigma: f64,
    pub gamma: f64,
}

/// For each round in `rounds`, the fraction of ATT episodes in which `edge`
/// is safe at the start of the round and an independent attenuation coin
/// for `edge` comes up 1. Coins come from a separate stream so the
/// episodes themselves are the ones [`run_episode`] would produce.
pub fn eligibility_profile(
    topo: &Topology,
    att: &AttPolicy,
    edge: usize,
    rounds: &[usize],
    episodes: usize,
    master_seed: u64,
) -> Result<Vec<EligibilityRate>, EngineError> {
    let policy = Policy::Att(att.clone());
    let hits: Vec<Vec<bool>> = (0..episodes as u64)
        .into_par_iter()
        .map(|m| {
            let mut rng = rng::stream(master_seed, Domain::Episode, m);
            let mut coins = rng::stream(master_seed, Domain::Diagnostic, m);
            let mut out = vec![false; rounds.len()];
            run_episode_with(topo, &policy, &mut rng, Arrivals::Sampled, false, |t, rem| {
                if let Some(pos) = rounds.iter().position(|&r| r == t) {
                    let z = coins.random::<f64>() < att.table.coin_mean(edge, t);
                    out[pos] = z && topo.is_safe(edge, rem);
                }
            })?;
            Ok(out)
        })
        .collect::<Result<_, EngineError>>()?;
    let n = episodes as f64;
    Ok(rounds
        .iter()
        .enumerate()
        .map(|(pos, &t)| {
            let count = hits.iter().filter(|h| h[pos]).count() as f64;
            let rate = count / n;
            EligibilityRate {
                round: t,
                rate,
                sigma: (rate * (1.0 - rate) / n).sqrt(),
                gamma: att.table.gamma(t),
            }
        })
        .collect())
}
