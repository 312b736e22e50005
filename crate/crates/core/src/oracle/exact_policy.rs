use super::{check_caps, edge_tables, spend, EdgeTable, ExactValue, OracleCaps, OracleError, Scalar};
use crate::instance::{Instance, Topology};
use crate::policies::{baseline_decide, Action, BaselineKind, SampTable};
use num_rational::BigRational;
use std::collections::HashMap;

#[derive(Clone, Copy, Debug)]
pub enum ExactPolicy<'a> {
    Greedy,
    /// Averaged over every order of the offline vertices.
    Ranking,
    Samp(&'a SampTable),
}

/// Largest offline side the Ranking enumeration accepts (7! orders).
const MAX_RANKING_OFFLINE: usize = 7;

struct Forward<'a, S, F> {
    topo: &'a Topology,
    edges: &'a [EdgeTable<S>],
    probs: &'a [S],
    /// Action law of agent `j` under budgets `b`: `(weight, edge)` pairs.
    law: F,
    memo: HashMap<(usize, Vec<u32>), S>,
    max_states: usize,
}

impl<S: Scalar, F: Fn(usize, &[u32]) -> Vec<(S, Option<usize>)>> Forward<'_, S, F> {
    fn value(&mut self, t: usize, budgets: &[u32]) -> Result<S, OracleError> {
        if t > self.topo.horizon {
            return Ok(S::zero());
        }
        let key = (t, budgets.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let mut total = S::zero();
        for j in 0..self.topo.n_agents() {
            let pj = self.probs[j].clone();
            if pj.is_zero() {
                continue;
            }
            let mut vj = S::zero();
            for (w, edge) in (self.law)(j, budgets) {
                let v = match edge {
                    None => self.value(t + 1, budgets)?,
                    Some(e) => {
                        let mut v = S::zero();
                        for (p, cost, u) in &self.edges[e].outcomes {
                            if p.is_zero() {
                                continue;
                            }
                            let rest = self.value(t + 1, &spend(budgets, cost))?;
                            v = v + p.clone() * (u.clone() + rest);
                        }
                        v
                    }
                };
                vj = vj + w * v;
            }
            total = total + pj * vj;
        }
        if self.memo.len() >= self.max_states {
            return Err(OracleError::StateSpaceExceeded {
                states: self.memo.len() + 1,
                cap: self.max_states,
            });
        }
        self.memo.insert(key, total.clone());
        Ok(total)
    }
}

fn run<S: Scalar, F: Fn(usize, &[u32]) -> Vec<(S, Option<usize>)>>(
    inst: &Instance,
    topo: &Topology,
    caps: &OracleCaps,
    law: F,
) -> Result<S, OracleError> {
    let edges = edge_tables::<S>(inst);
    let probs: Vec<S> = inst.online.iter().map(|a| S::from_num(&a.p)).collect();
    let mut fwd = Forward {
        topo,
        edges: &edges,
        probs: &probs,
        law,
        memo: HashMap::new(),
        max_states: caps.max_states,
    };
    fwd.value(1, &topo.budgets)
}

fn baseline<S: Scalar>(
    inst: &Instance,
    topo: &Topology,
    caps: &OracleCaps,
    kind: BaselineKind,
    rank: &[usize],
) -> Result<S, OracleError> {
    run::<S, _>(inst, topo, caps, |j, b| {
        let edge = match baseline_decide(kind, topo, j, b, rank).action {
            Action::Attempt(e) => Some(e),
            Action::Reject => None,
        };
        vec![(S::one(), edge)]
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn ranking<S: Scalar>(inst: &Instance, topo: &Topology, caps: &OracleCaps) -> Result<S, OracleError> {
    let n = topo.n_offline;
    if n > MAX_RANKING_OFFLINE {
        return Err(OracleError::CapsExceeded {
            what: "offline vertices",
            value: n,
            cap: MAX_RANKING_OFFLINE,
        });
    }
    let perms = permutations(n);
    let mut total = S::zero();
    for rank in &perms {
        total = total + baseline::<S>(inst, topo, caps, BaselineKind::Ranking, rank)?;
    }
    Ok(total / S::from_u64(perms.len() as u64))
}

/// Exact expected utility of a policy over arrivals, policy coins and
/// outcomes. Greedy and Ranking are rational on exact instances; SAMP
/// uses the floating LP solution.
pub fn exact_policy_value(inst: &Instance, policy: ExactPolicy<'_>, caps: &OracleCaps) -> Result<ExactValue, OracleError> {
    check_caps(inst, caps)?;
    let topo = inst.topology()?;
    let exact = inst.is_exact();
    match policy {
        ExactPolicy::Greedy if exact => {
            Ok(baseline::<BigRational>(inst, &topo, caps, BaselineKind::Greedy, &[])?.into_value())
        }
        ExactPolicy::Greedy => Ok(baseline::<f64>(inst, &topo, caps, BaselineKind::Greedy, &[])?.into_value()),
        ExactPolicy::Ranking if exact => Ok(ranking::<BigRational>(inst, &topo, caps)?.into_value()),
        ExactPolicy::Ranking => Ok(ranking::<f64>(inst, &topo, caps)?.into_value()),
        ExactPolicy::Samp(table) => {
            let v = run::<f64, _>(inst, &topo, caps, |j, b| {
                let law = table.law(j);
                let mut out: Vec<(f64, Option<usize>)> = law
                    .iter()
                    .map(|&(e, q)| (q, topo.is_safe(e, b).then_some(e)))
                    .collect();
                out.push(((1.0 - table.mass(j)).max(0.0), None));
                out
            })?;
            Ok(v.into_value())
        }
    }
}
