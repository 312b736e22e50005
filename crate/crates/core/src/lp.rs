//! The benchmark LP and a dense primal simplex for `max cᵀx, Ax ≤ b, x ≥ 0`
//! with `b ≥ 0`.

use crate::instance::{Instance, InstanceError};
use std::collections::HashMap;
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("simplex did not terminate within {iterations} pivots")]
    NumericFailure { iterations: usize },
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed model: {0}")]
    BadModel(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpModel {
    pub objective: Vec<f64>,
    /// Dense `rows × columns` coefficients.
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub row_labels: Vec<String>,
    pub column_labels: Vec<String>,
}

impl LpModel {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.objective.len()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c * x).sum()
    }

    fn row_activity(&self, i: usize, x: &[f64]) -> f64 {
        self.rows[i].iter().zip(x).map(|(a, x)| a * x).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x_star: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    pub iterations: usize,
    /// Rows whose slack is within `tol·(1+|rhs|)`.
    pub binding: Vec<usize>,
}

/// One column per edge with weight `w_e`; one row per online agent bounding
/// its edges by `r_j`, then one row per resource bounding expected usage by
/// `B_k`.
pub fn build_benchmark_lp(inst: &Instance) -> Result<LpModel, LpError> {
    let report = crate::instance::validate_instance(inst);
    if !report.is_empty() {
        return Err(InstanceError::Invalid(report).into());
    }
    let n = inst.edges.len();
    let agent: HashMap<&str, usize> = inst
        .online
        .iter()
        .enumerate()
        .map(|(j, a)| (a.id.as_str(), j))
        .collect();
    let n_rows = inst.online.len() + inst.resources;
    let mut rows = vec![vec![0.0; n]; n_rows];
    for (c, e) in inst.edges.iter().enumerate() {
        rows[agent[e.online_id.as_str()]][c] = 1.0;
        for o in &e.outcomes {
            for &k in &o.cost_support {
                rows[inst.online.len() + k][c] += o.prob.value();
            }
        }
    }
    let mut rhs: Vec<f64> = (0..inst.online.len()).map(|j| inst.rate(j)).collect();
    rhs.extend(inst.budgets.iter().map(|&b| b as f64));
    let mut row_labels: Vec<String> = inst.online.iter().map(|a| format!("agent:{}", a.id)).collect();
    row_labels.extend((0..inst.resources).map(|k| format!("resource:{}", k)));
    Ok(LpModel {
        objective: inst.edges.iter().map(|e| e.expected_utility()).collect(),
        rows,
        rhs,
        row_labels,
        column_labels: inst
            .edges
            .iter()
            .map(|e| format!("{}-{}", e.offline_id, e.online_id))
            .collect(),
    })
}

pub fn check_feasible(model: &LpModel, x: &[f64], tol: f64) -> Result<bool, LpError> {
    if x.len() != model.n_cols() {
        return Err(LpError::DimensionMismatch {
            expected: model.n_cols(),
            got: x.len(),
        });
    }
    if x.iter().any(|&v| !(v >= -tol)) {
        return Ok(false);
    }
    Ok((0..model.n_rows()).all(|i| model.row_activity(i, x) <= model.rhs[i] + tol * (1.0 + model.rhs[i].abs())))
}

/// Bland's rule simplex from the slack basis. Entering column: lowest index
/// with positive reduced cost. Leaving row: minimum ratio, ties to the lowest
/// basic variable index.
pub fn solve_lp(model: &LpModel, tol: f64) -> Result<LpSolution, LpError> {
    let m = model.n_rows();
    let n = model.n_cols();
    if !(tol > 0.0) {
        return Err(LpError::BadModel("tolerance must be positive".into()));
    }
    if model.rhs.len() != m || model.rows.iter().any(|r| r.len() != n) {
        return Err(LpError::BadModel("row lengths disagree with the column count".into()));
    }
    let finite = |v: &f64| v.is_finite();
    if !(model.objective.iter().all(finite)
        && model.rhs.iter().all(finite)
        && model.rows.iter().flatten().all(finite))
    {
        return Err(LpError::BadModel("non-finite coefficient".into()));
    }
    if let Some(i) = model.rhs.iter().position(|&b| b < 0.0) {
        return Err(LpError::BadModel(format!("row {} has negative right-hand side", i)));
    }

    let width = n + m;
    let mut tab: Vec<Vec<f64>> = model
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = Vec::with_capacity(width);
            row.extend_from_slice(r);
            row.resize(width, 0.0);
            row[n + i] = 1.0;
            row
        })
        .collect();
    let mut b = model.rhs.clone();
    let mut basis: Vec<usize> = (n..width).collect();
    let mut reduced: Vec<f64> = model.objective.clone();
    reduced.resize(width, 0.0);

    let cap = 50 * (m + n).max(1);
    let mut iterations = 0;
    let mut support = Vec::with_capacity(width);
    loop {
        let Some(pc) = reduced.iter().position(|&d| d > tol) else {
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = tab[i][pc];
            if a > tol {
                let ratio = b[i] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        if ratio < best - tol * (1.0 + best.abs()) {
                            Some((i, ratio))
                        } else if ratio <= best + tol * (1.0 + best.abs()) && basis[i] < basis[r] {
                            Some((i, ratio.min(best)))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let Some((pr, _)) = leave else {
            return Ok(LpSolution {
                x_star: vec![0.0; n],
                objective: f64::INFINITY,
                status: LpStatus::Unbounded,
                iterations,
                binding: Vec::new(),
            });
        };
        iterations += 1;
        if iterations > cap {
            return Err(LpError::NumericFailure { iterations: cap });
        }

        let piv = tab[pr][pc];
        for v in tab[pr].iter_mut() {
            *v /= piv;
        }
        b[pr] /= piv;
        tab[pr][pc] = 1.0;
        support.clear();
        support.extend((0..width).filter(|&c| tab[pr][c] != 0.0));
        let (head, rest) = tab.split_at_mut(pr);
        let (prow, tail) = rest.split_first_mut().expect("pivot row");
        for (i, row) in head.iter_mut().enumerate().chain(tail.iter_mut().enumerate().map(|(i, r)| (i + pr + 1, r))) {
            let f = row[pc];
            if f == 0.0 {
                continue;
            }
            for &c in &support {
                row[c] -= f * prow[c];
            }
            row[pc] = 0.0;
            b[i] -= f * b[pr];
            if b[i] < 0.0 && b[i] > -tol {
                b[i] = 0.0;
            }
        }
        let f = reduced[pc];
        for &c in &support {
            reduced[c] -= f * prow[c];
        }
        reduced[pc] = 0.0;
        basis[pr] = pc;
    }

    let mut x = vec![0.0; n];
    for (i, &v) in basis.iter().enumerate() {
        if v < n {
            x[v] = b[i].max(0.0);
        }
    }
    let binding = (0..m)
        .filter(|&i| model.rhs[i] - model.row_activity(i, &x) <= tol * (1.0 + model.rhs[i].abs()))
        .collect();
    Ok(LpSolution {
        objective: model.value(&x),
        x_star: x,
        status: LpStatus::Optimal,
        iterations,
        binding,
    })
}
