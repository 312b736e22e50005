use super::Decision;
use crate::instance::Topology;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaselineKind {
    /// Safe incident edge of largest expected utility, ties to lowest index.
    Greedy,
    /// Safe incident edge whose offline endpoint ranks first in a random
    /// order drawn once per episode.
    Ranking,
}

/// `rank[i]` is the position of offline vertex `i` in a uniform permutation.
pub fn random_rank<R: Rng>(topo: &Topology, rng: &mut R) -> Vec<usize> {
    let n_offline = topo.n_offline;
    let mut order: Vec<usize> = (0..n_offline).collect();
    order.shuffle(rng);
    let mut rank = vec![0; n_offline];
    for (pos, &i) in order.iter().enumerate() {
        rank[i] = pos;
    }
    rank
}

pub fn baseline_decide(
    kind: BaselineKind,
    topo: &Topology,
    j: usize,
    remaining: &[u32],
    rank: &[usize],
) -> Decision {
    let safe = topo.edges_of_agent[j]
        .iter()
        .copied()
        .filter(|&e| topo.is_safe(e, remaining));
    // Edges come in index order; keep the earliest among equal utilities.
    let pick = match kind {
        BaselineKind::Greedy => safe.fold(None, |best: Option<usize>, e| match best {
            Some(b) if topo.mean_utility[b] >= topo.mean_utility[e] => Some(b),
            _ => Some(e),
        }),
        BaselineKind::Ranking => safe.min_by_key(|&e| rank[topo.edge_offline[e]]),
    };
    pick.map_or(Decision::REJECT, Decision::attempt)
}
