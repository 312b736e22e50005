use super::Instance;
use std::collections::HashMap;

/// Index-based view of a validated instance, built once and shared by the
/// solver, the policies and the engine.
#[derive(Clone, Debug)]
pub struct Topology {
    pub horizon: usize,
    pub budgets: Vec<u32>,
    pub sparsity: usize,
    pub n_offline: usize,
    /// Online agent position of each edge.
    pub edge_agent: Vec<usize>,
    /// Offline vertex position of each edge.
    pub edge_offline: Vec<usize>,
    pub edges_of_agent: Vec<Vec<usize>>,
    /// `S_e`, sorted.
    pub support: Vec<Vec<usize>>,
    pub edges_of_resource: Vec<Vec<usize>>,
    pub rates: Vec<f64>,
    pub mean_utility: Vec<f64>,
    pub outcome_support: Vec<Vec<Vec<usize>>>,
    pub outcome_utility: Vec<Vec<f64>>,
    arrival_cdf: Vec<f64>,
    outcome_cdf: Vec<Vec<f64>>,
}

fn cdf<I: Iterator<Item = f64>>(probs: I) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// Index `i` with `cdf[i-1] <= u < cdf[i]`; rounding slack past the last
/// entry maps to the last positive-mass index.
fn invert(cdf: &[f64], u: f64) -> usize {
    let i = cdf.partition_point(|&c| c <= u);
    if i < cdf.len() {
        return i;
    }
    let last = *cdf.last().expect("empty distribution");
    cdf.partition_point(|&c| c < last)
}

impl Topology {
    /// Assumes `inst` is valid; use [`Instance::topology`] for checked access.
    pub fn build(inst: &Instance) -> Topology {
        let agent_pos: HashMap<&str, usize> = inst
            .online
            .iter()
            .enumerate()
            .map(|(n, a)| (a.id.as_str(), n))
            .collect();
        let offline_pos: HashMap<&str, usize> = inst
            .offline
            .iter()
            .enumerate()
            .map(|(n, id)| (id.as_str(), n))
            .collect();

        let mut edges_of_agent = vec![Vec::new(); inst.online.len()];
        let mut edges_of_resource = vec![Vec::new(); inst.resources];
        let mut edge_agent = Vec::with_capacity(inst.edges.len());
        let mut edge_offline = Vec::with_capacity(inst.edges.len());
        let mut support = Vec::with_capacity(inst.edges.len());
        for (n, e) in inst.edges.iter().enumerate() {
            let j = agent_pos[e.online_id.as_str()];
            edge_agent.push(j);
            edge_offline.push(offline_pos[e.offline_id.as_str()]);
            edges_of_agent[j].push(n);
            let s = e.support();
            for &k in &s {
                edges_of_resource[k].push(n);
            }
            support.push(s);
        }

        Topology {
            horizon: inst.horizon,
            budgets: inst.budgets.clone(),
            sparsity: support.iter().map(Vec::len).max().unwrap_or(0),
            n_offline: inst.offline.len(),
            edge_agent,
            edge_offline,
            edges_of_agent,
            support,
            edges_of_resource,
            rates: (0..inst.online.len()).map(|j| inst.rate(j)).collect(),
            mean_utility: inst.edges.iter().map(|e| e.expected_utility()).collect(),
            outcome_support: inst
                .edges
                .iter()
                .map(|e| e.outcomes.iter().map(|o| o.cost_support.clone()).collect())
                .collect(),
            outcome_utility: inst
                .edges
                .iter()
                .map(|e| e.outcomes.iter().map(|o| o.utility.value()).collect())
                .collect(),
            arrival_cdf: cdf(inst.online.iter().map(|a| a.p.value())),
            outcome_cdf: inst
                .edges
                .iter()
                .map(|e| cdf(e.outcomes.iter().map(|o| o.prob.value())))
                .collect(),
        }
    }

    pub fn n_edges(&self) -> usize {
        self.edge_agent.len()
    }

    pub fn n_agents(&self) -> usize {
        self.edges_of_agent.len()
    }

    pub fn n_resources(&self) -> usize {
        self.budgets.len()
    }

    /// Arrival drawn from a uniform `u ∈ [0,1)`.
    pub fn arrival(&self, u: f64) -> usize {
        invert(&self.arrival_cdf, u)
    }

    /// Outcome of edge `e` drawn from a uniform `u ∈ [0,1)`, inverse CDF over
    /// the stored outcome order.
    pub fn outcome(&self, e: usize, u: f64) -> usize {
        invert(&self.outcome_cdf[e], u)
    }

    /// Every resource in `S_e` has at least one unit left.
    #[inline]
    pub fn is_safe(&self, e: usize, remaining: &[u32]) -> bool {
        self.support[e].iter().all(|&k| remaining[k] > 0)
    }
}
