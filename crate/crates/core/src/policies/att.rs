use super::{Action, Decision, PolicyError, SampTable};
use crate::instance::Topology;
use crate::rng::{self, Domain, StreamRng};
use crate::stats::Z95;
use rand::Rng;
use rayon::prelude::*;

pub const MIN_REPLICAS: usize = 1000;
pub const DEFAULT_REPLICAS: usize = 100_000;
pub const DEFAULT_CELL_CAP: usize = 10_000_000;

/// Replicas per RNG stream. Fixed, so results do not depend on thread count.
const CHUNK: usize = 512;

/// Monte-Carlo safety probabilities `β̂_{e,t}` of ATT's offline phase.
#[derive(Clone, Debug, PartialEq)]
pub struct AttenuationTable {
    n_edges: usize,
    horizon: usize,
    replicas: usize,
    /// Round-major: entry `(t-1)·|E| + e`.
    beta_hat: Vec<f64>,
    ci: Vec<f64>,
    gamma: Vec<f64>,
    clamp_cells: usize,
    significant_inversions: usize,
}

impl AttenuationTable {
    #[inline]
    fn idx(&self, e: usize, t: usize) -> usize {
        (t - 1) * self.n_edges + e
    }

    pub fn replicas(&self) -> usize {
        self.replicas
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn beta(&self, e: usize, t: usize) -> f64 {
        self.beta_hat[self.idx(e, t)]
    }

    pub fn ci(&self, e: usize, t: usize) -> f64 {
        self.ci[self.idx(e, t)]
    }

    /// `γ_t = (1 − αΔ/T)^{t−1}`.
    pub fn gamma(&self, t: usize) -> f64 {
        self.gamma[t - 1]
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gamma
    }

    /// Attenuation coin mean `clamp(γ_t / β̂_{e,t}, 0, 1)`.
    #[inline]
    pub fn coin_mean(&self, e: usize, t: usize) -> f64 {
        (self.gamma[t - 1] / self.beta_hat[self.idx(e, t)]).clamp(0.0, 1.0)
    }

    /// The cell's estimate fell below `γ_t`, so its coin is clamped to 1.
    pub fn clamped(&self, e: usize, t: usize) -> bool {
        self.gamma[t - 1] > self.beta_hat[self.idx(e, t)]
    }

    pub fn clamp_cells(&self) -> usize {
        self.clamp_cells
    }

    /// Fraction of `(e, t)` cells with `γ_t > β̂_{e,t}`.
    pub fn clamp_rate(&self) -> f64 {
        self.clamp_cells as f64 / self.beta_hat.len().max(1) as f64
    }

    /// Fraction of cells where `γ_t` exceeds `β̂_{e,t}` by more than its CI.
    pub fn significant_inversion_rate(&self) -> f64 {
        self.significant_inversions as f64 / self.beta_hat.len().max(1) as f64
    }
}

/// SAMP law plus attenuation table.
#[derive(Clone, Debug)]
pub struct AttPolicy {
    pub samp: SampTable,
    pub table: AttenuationTable,
}

impl AttPolicy {
    pub fn new(
        topo: &Topology,
        samp: SampTable,
        replicas: usize,
        master_seed: u64,
    ) -> Result<AttPolicy, PolicyError> {
        let table = att_precompute(topo, &samp, replicas, master_seed, DEFAULT_CELL_CAP)?;
        Ok(AttPolicy { samp, table })
    }
}

fn gammas(topo: &Topology, alpha: f64) -> Result<Vec<f64>, PolicyError> {
    let t_len = topo.horizon;
    let step = alpha * topo.sparsity as f64 / t_len as f64;
    if step > 1.0 {
        return Err(PolicyError::HorizonTooShort(alpha * topo.sparsity as f64, t_len));
    }
    let ratio = 1.0 - step;
    let mut g = Vec::with_capacity(t_len);
    let mut cur = 1.0;
    for _ in 0..t_len {
        g.push(cur);
        cur *= ratio;
    }
    Ok(g)
}

/// Advance one replica through round `t`. Returns edges that just became
/// unsafe in this replica.
#[allow(clippy::too_many_arguments)]
fn replica_round(
    topo: &Topology,
    samp: &SampTable,
    column: &[f64],
    gamma_t: f64,
    rem: &mut [u32],
    rng: &mut StreamRng,
    lost: &mut Vec<usize>,
) -> Result<(), PolicyError> {
    let j = topo.arrival(rng.random::<f64>());
    let Some(e) = samp.sample(j, rng.random::<f64>())? else {
        return Ok(());
    };
    if !topo.is_safe(e, rem) {
        return Ok(());
    }
    let mean = (gamma_t / column[e]).clamp(0.0, 1.0);
    if rng.random::<f64>() >= mean {
        return Ok(());
    }
    let o = topo.outcome(e, rng.random::<f64>());
    for &k in &topo.outcome_support[e][o] {
        rem[k] -= 1;
        if rem[k] == 0 {
            for &f in &topo.edges_of_resource[k] {
                if topo.support[f].iter().all(|&r| r == k || rem[r] > 0) {
                    lost.push(f);
                }
            }
        }
    }
    Ok(())
}

/// Run `replicas` copies of ATT's online phase in lockstep. Round `t` of every
/// replica attenuates with the column `β̂_{·,t}` estimated from the safety
/// status of all replicas at the start of round `t`.
pub fn att_precompute(
    topo: &Topology,
    samp: &SampTable,
    replicas: usize,
    master_seed: u64,
    cell_cap: usize,
) -> Result<AttenuationTable, PolicyError> {
    if replicas < MIN_REPLICAS {
        return Err(PolicyError::BadReplicaCount(replicas));
    }
    let n_edges = topo.n_edges();
    let horizon = topo.horizon;
    let cells = n_edges.saturating_mul(horizon);
    if cells > cell_cap {
        return Err(PolicyError::TableTooLarge { cells, cap: cell_cap });
    }
    let gamma = gammas(topo, samp.alpha())?;
    let k = topo.n_resources();
    let nf = replicas as f64;

    let mut beta_hat = Vec::with_capacity(cells);
    let mut ci = Vec::with_capacity(cells);
    let mut safe: Vec<u64> = vec![replicas as u64; n_edges];
    let stride = k.max(1);
    let mut remaining: Vec<u32> = (0..replicas)
        .flat_map(|_| topo.budgets.iter().copied().chain(std::iter::repeat(0).take(stride - k)))
        .collect();
    let n_chunks = replicas.div_ceil(CHUNK);
    let mut rngs: Vec<StreamRng> = (0..n_chunks)
        .map(|c| rng::stream(master_seed, Domain::AttReplica, c as u64))
        .collect();

    for t in 1..=horizon {
        let start = beta_hat.len();
        for &s in &safe {
            let (b, h) = if t == 1 {
                (1.0, 0.0)
            } else {
                let b = (s as f64 / nf).max(1.0 / nf);
                (b, Z95 * (b * (1.0 - b) / nf).sqrt())
            };
            beta_hat.push(b);
            ci.push(h);
        }
        if t == horizon || k == 0 {
            continue;
        }
        let column = &beta_hat[start..];
        let g = gamma[t - 1];
        let lost: Vec<Vec<usize>> = remaining
            .par_chunks_mut(CHUNK * stride)
            .zip(rngs.par_iter_mut())
            .map(|(block, rng)| {
                let mut lost = Vec::new();
                for rem in block.chunks_mut(stride) {
                    replica_round(topo, samp, column, g, rem, rng, &mut lost)?;
                }
                Ok(lost)
            })
            .collect::<Result<_, PolicyError>>()?;
        for f in lost.into_iter().flatten() {
            safe[f] -= 1;
        }
    }

    let mut clamp_cells = 0;
    let mut significant_inversions = 0;
    for (n, (&b, &h)) in beta_hat.iter().zip(&ci).enumerate() {
        let g = gamma[n / n_edges.max(1)];
        if g > b {
            clamp_cells += 1;
        }
        if g > b + h {
            significant_inversions += 1;
        }
    }
    Ok(AttenuationTable {
        n_edges,
        horizon,
        replicas,
        beta_hat,
        ci,
        gamma,
        clamp_cells,
        significant_inversions,
    })
}

pub fn att_decide<R: Rng>(
    topo: &Topology,
    policy: &AttPolicy,
    t: usize,
    j: usize,
    remaining: &[u32],
    rng: &mut R,
) -> Result<Decision, PolicyError> {
    let sampled = policy.samp.sample(j, rng.random::<f64>())?;
    let Some(e) = sampled else {
        return Ok(Decision::REJECT);
    };
    if !topo.is_safe(e, remaining) {
        return Ok(Decision {
            action: Action::Reject,
            sampled,
            coin: None,
        });
    }
    let z = rng.random::<f64>() < policy.table.coin_mean(e, t);
    Ok(Decision {
        action: if z { Action::Attempt(e) } else { Action::Reject },
        sampled,
        coin: Some(z),
    })
}
