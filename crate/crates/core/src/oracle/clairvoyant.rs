use super::{check_caps, edge_tables, is_safe, spend, EdgeTable, ExactValue, OracleCaps, OracleError, Scalar};
use crate::instance::Instance;
use num_rational::BigRational;
use std::collections::HashMap;

struct Search<'a, S> {
    edges: &'a [EdgeTable<S>],
    edges_of_agent: Vec<Vec<usize>>,
    memo: HashMap<Vec<u32>, S>,
    max_states: usize,
}

impl<S: Scalar> Search<'_, S> {
    /// Best expected utility from the remaining arrival multiset `counts`
    /// with budgets `budgets`: stop, or process any remaining agent on any
    /// safe incident edge and continue optimally after seeing the outcome.
    fn value(&mut self, counts: &mut [u32], budgets: &[u32]) -> Result<S, OracleError> {
        let key: Vec<u32> = counts.iter().chain(budgets).copied().collect();
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let mut best = S::zero();
        for j in 0..counts.len() {
            if counts[j] == 0 {
                continue;
            }
            counts[j] -= 1;
            for n in 0..self.edges_of_agent[j].len() {
                let e = self.edges_of_agent[j][n];
                if !is_safe(&self.edges[e].support, budgets) {
                    continue;
                }
                let mut v = S::zero();
                for o in 0..self.edges[e].outcomes.len() {
                    let (p, cost, u) = &self.edges[e].outcomes[o];
                    if p.is_zero() {
                        continue;
                    }
                    let (p, u) = (p.clone(), u.clone());
                    let next = spend(budgets, cost);
                    let rest = self.value(counts, &next)?;
                    v = v + p * (u + rest);
                }
                if v > best {
                    best = v;
                }
            }
            counts[j] += 1;
        }
        if self.memo.len() >= self.max_states {
            return Err(OracleError::StateSpaceExceeded {
                states: self.memo.len() + 1,
                cap: self.max_states,
            });
        }
        self.memo.insert(key, best.clone());
        Ok(best)
    }
}

/// Visit every composition of `total` into `parts` non-negative parts.
fn compositions(parts: usize, total: u32, f: &mut dyn FnMut(&[u32]) -> Result<(), OracleError>) -> Result<(), OracleError> {
    fn go(
        cur: &mut Vec<u32>,
        parts: usize,
        left: u32,
        f: &mut dyn FnMut(&[u32]) -> Result<(), OracleError>,
    ) -> Result<(), OracleError> {
        if cur.len() + 1 == parts {
            cur.push(left);
            f(cur)?;
            cur.pop();
            return Ok(());
        }
        for c in 0..=left {
            cur.push(c);
            go(cur, parts, left - c, f)?;
            cur.pop();
        }
        Ok(())
    }
    if parts == 0 {
        return if total == 0 { f(&[]) } else { Ok(()) };
    }
    go(&mut Vec::with_capacity(parts), parts, total, f)
}

fn solve<S: Scalar>(inst: &Instance, caps: &OracleCaps) -> Result<S, OracleError> {
    let topo = inst.topology()?;
    let edges = edge_tables::<S>(inst);
    let probs: Vec<S> = inst.online.iter().map(|a| S::from_num(&a.p)).collect();
    let t = inst.horizon as u32;
    let mut fact = vec![S::one()];
    for n in 1..=t as u64 {
        let last = fact[fact.len() - 1].clone();
        fact.push(last * S::from_u64(n));
    }
    let mut search = Search {
        edges: &edges,
        edges_of_agent: topo.edges_of_agent.clone(),
        memo: HashMap::new(),
        max_states: caps.max_states,
    };
    let mut total = S::zero();
    compositions(probs.len(), t, &mut |counts| {
        // Multinomial weight T!/∏c_j! · ∏ p_j^{c_j}.
        let mut w = fact[t as usize].clone();
        for (j, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            if probs[j].is_zero() {
                return Ok(());
            }
            w = w / fact[c as usize].clone();
            for _ in 0..c {
                w = w * probs[j].clone();
            }
        }
        let mut c = counts.to_vec();
        let v = search.value(&mut c, &topo.budgets)?;
        total = total.clone() + w * v;
        Ok(())
    })?;
    Ok(total)
}

/// `E_S[OPT(S)]` for the fully adaptive clairvoyant that sees the arrival
/// multiset, processes agents in any order and observes each outcome before
/// the next choice. Rational when the instance is exact.
pub fn clairvoyant_opt(inst: &Instance, caps: &OracleCaps) -> Result<ExactValue, OracleError> {
    check_caps(inst, caps)?;
    if inst.is_exact() {
        Ok(solve::<BigRational>(inst, caps)?.into_value())
    } else {
        Ok(solve::<f64>(inst, caps)?.into_value())
    }
}
