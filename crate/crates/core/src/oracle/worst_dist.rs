use super::OracleError;
use crate::rng::{stream, Domain};
use rand::Rng;
use serde::Serialize;
use std::collections::HashMap;

/// `Pr[∃k: count_k ≥ B]` after `t` i.i.d. throws, where a throw adds the
/// cost vector `mask` (bit `k` = resource `k`) with the listed probability
/// and the zero vector with the remaining mass.
pub fn overflow_probability(atoms: &[(f64, u32)], delta: usize, b: u32, t: usize) -> f64 {
    let zero: f64 = 1.0 - atoms.iter().map(|a| a.0).sum::<f64>();
    let mut cur: HashMap<Vec<u32>, f64> = HashMap::from([(vec![0; delta], 1.0)]);
    for _ in 0..t {
        let mut next: HashMap<Vec<u32>, f64> = HashMap::with_capacity(cur.len() * 2);
        for (state, p) in &cur {
            *next.entry(state.clone()).or_default() += p * zero;
            for &(q, mask) in atoms {
                if q == 0.0 {
                    continue;
                }
                let mut s = state.clone();
                let mut over = false;
                for (k, c) in s.iter_mut().enumerate() {
                    if mask >> k & 1 == 1 {
                        *c += 1;
                        over |= *c >= b;
                    }
                }
                if !over {
                    *next.entry(s).or_default() += p * q;
                }
            }
        }
        cur = next;
    }
    1.0 - cur.values().sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstDistReport {
    pub delta: usize,
    pub b: u32,
    pub horizon: usize,
    pub t: usize,
    /// Overflow under the basis-vector distribution.
    pub basis_overflow: f64,
    pub distributions_checked: usize,
    /// Largest `overflow(D) − overflow(D*)` seen; `≤ 0` when `D*` is worst.
    pub max_violation: f64,
    /// Largest `overflow(mass on all-ones) − overflow(mass split over basis vectors)`.
    pub split_violation: f64,
}

const GRID: usize = 20;

/// Marginal of resource `k` under `atoms`.
fn marginal(atoms: &[(f64, u32)], k: usize) -> f64 {
    atoms.iter().filter(|a| a.1 >> k & 1 == 1).map(|a| a.0).sum()
}

/// Compare the basis-vector distribution `D*` (each `e_k` with probability
/// `B/T`) against feasible cost distributions on `{0,1}^Δ` with every
/// marginal at most `B/T`. `Δ ≤ 2` runs an exhaustive 21-point grid;
/// `Δ = 3` draws `trials` random distributions scaled onto the boundary.
pub fn worst_distribution_check(delta: usize, b: u32, horizon: usize, t: usize, trials: usize) -> Result<WorstDistReport, OracleError> {
    if !(1..=3).contains(&delta) || b == 0 || b > 2 || t > 6 || horizon == 0 {
        return Err(OracleError::BadParams("needs 1 ≤ delta ≤ 3, 1 ≤ B ≤ 2, t ≤ 6".into()));
    }
    if delta * b as usize > horizon {
        return Err(OracleError::BadParams("delta*B exceeds T".into()));
    }
    let p = b as f64 / horizon as f64;
    let basis: Vec<(f64, u32)> = (0..delta).map(|k| (p, 1u32 << k)).collect();
    let basis_overflow = overflow_probability(&basis, delta, b, t);
    let mut checked = 0usize;
    let mut max_violation = f64::NEG_INFINITY;
    let mut consider = |atoms: &[(f64, u32)]| {
        checked += 1;
        let v = overflow_probability(atoms, delta, b, t) - basis_overflow;
        max_violation = max_violation.max(v);
    };
    let step = p / GRID as f64;
    match delta {
        1 => {
            for i in 0..=GRID {
                consider(&[(i as f64 * step, 1)]);
            }
        }
        2 => {
            for i in 0..=GRID {
                for j in 0..=GRID {
                    for c in 0..=GRID.min(GRID - i).min(GRID - j) {
                        consider(&[(i as f64 * step, 0b01), (j as f64 * step, 0b10), (c as f64 * step, 0b11)]);
                    }
                }
            }
        }
        _ => {
            let mut rng = stream(0, Domain::Diagnostic, (delta as u64) << 32 | b as u64);
            for _ in 0..trials {
                let mut atoms: Vec<(f64, u32)> = (1..8u32).map(|m| (rng.random::<f64>(), m)).collect();
                // Sparse draws reach the corners of the polytope.
                for a in atoms.iter_mut() {
                    if rng.random_bool(0.5) {
                        a.0 = 0.0;
                    }
                }
                let worst = (0..delta).map(|k| marginal(&atoms, k)).fold(0.0, f64::max);
                if worst == 0.0 {
                    continue;
                }
                for a in atoms.iter_mut() {
                    a.0 *= p / worst;
                }
                consider(&atoms);
            }
        }
    }
    // Moving mass c off the all-ones vector onto each basis vector keeps the
    // marginals and never lowers the overflow probability.
    let mut split_violation = f64::NEG_INFINITY;
    if delta >= 2 {
        let all = (1u32 << delta) - 1;
        for i in 1..=GRID {
            let c = i as f64 * step;
            let joint = overflow_probability(&[(c, all)], delta, b, t);
            let split: Vec<(f64, u32)> = (0..delta).map(|k| (c, 1u32 << k)).collect();
            split_violation = split_violation.max(joint - overflow_probability(&split, delta, b, t));
        }
    } else {
        split_violation = 0.0;
    }
    Ok(WorstDistReport {
        delta,
        b,
        horizon,
        t,
        basis_overflow,
        distributions_checked: checked,
        max_violation,
        split_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_of_unit_bins() {
        // B=1: overflow iff any nonzero draw.
        let atoms = [(0.1, 0b01), (0.2, 0b10)];
        let v = overflow_probability(&atoms, 2, 1, 4);
        assert!((v - (1.0 - 0.7f64.powi(4))).abs() < 1e-15);
        assert_eq!(overflow_probability(&atoms, 2, 1, 0), 0.0);
    }

    #[test]
    fn overflow_capacity_two() {
        // One bin, three throws, hit prob p, overflow iff ≥2 hits.
        let p = 0.3;
        let v = overflow_probability(&[(p, 1)], 1, 2, 3);
        let exact = 3.0 * p * p * (1.0 - p) + p * p * p;
        assert!((v - exact).abs() < 1e-15);
    }

    #[test]
    fn basis_vectors_are_worst_on_two_bins() {
        let r = worst_distribution_check(2, 1, 10, 4, 0).unwrap();
        assert!(r.max_violation <= 1e-12, "{r:?}");
        assert!(r.split_violation <= 1e-12);
        assert!(r.distributions_checked > 21 * 21);
    }

    #[test]
    fn single_bin_is_trivial() {
        let r = worst_distribution_check(1, 2, 10, 5, 0).unwrap();
        assert!(r.max_violation.abs() < 1e-15);
    }

    #[test]
    fn three_bins_random_trials() {
        let r = worst_distribution_check(3, 2, 12, 6, 300).unwrap();
        assert!(r.max_violation <= 1e-12, "{r:?}");
        assert!(r.split_violation <= 1e-12);
    }

    #[test]
    fn rejects_large_inputs() {
        assert!(worst_distribution_check(4, 1, 10, 3, 0).is_err());
        assert!(worst_distribution_check(2, 2, 3, 3, 0).is_err());
    }
}
