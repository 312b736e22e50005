//! Exact computations on tiny instances and balls-and-bins ratio oracles.

mod bbins;
mod clairvoyant;
mod exact_policy;
pub mod lemmas;
mod worst_dist;

pub use bbins::{bbins_exact, bbins_mc, bbins_ratio, BbEstimate, BbMethod, BbParams};
pub use clairvoyant::clairvoyant_opt;
pub use exact_policy::{exact_policy_value, ExactPolicy};
pub use worst_dist::{overflow_probability, worst_distribution_check, WorstDistReport};

use crate::instance::{Instance, InstanceError, Num};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    pub max_states: usize,
    pub max_t: usize,
    pub max_edges: usize,
    pub max_outcomes: usize,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            max_states: 10_000_000,
            max_t: 8,
            max_edges: 6,
            max_outcomes: 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("{what} = {value} exceeds the cap {cap}")]
    CapsExceeded { what: &'static str, value: usize, cap: usize },
    #[error("state space of {states} states exceeds the cap {cap}")]
    StateSpaceExceeded { states: usize, cap: usize },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

/// An expected value, exact when every input was rational.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactValue {
    pub value: f64,
    pub exact: Option<BigRational>,
}

impl ExactValue {
    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// `self / other`, exact when both are.
    pub fn ratio(&self, other: &ExactValue) -> ExactValue {
        match (&self.exact, &other.exact) {
            (Some(a), Some(b)) if !b.is_zero() => ExactValue::from_rational(a / b),
            _ => ExactValue {
                value: self.value / other.value,
                exact: None,
            },
        }
    }

    fn from_rational(r: BigRational) -> ExactValue {
        ExactValue {
            value: r.to_f64().unwrap_or(f64::NAN),
            exact: Some(r),
        }
    }
}

impl fmt::Display for ExactValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) => write!(f, "{}", r),
            None => write!(f, "{}", self.value),
        }
    }
}

/// Field operations the oracles need, over `f64` or exact rationals.
pub(crate) trait Scalar:
    Clone
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
{
    fn from_num(n: &Num) -> Self;
    fn from_u64(n: u64) -> Self;
    fn into_value(self) -> ExactValue;
}

impl Scalar for f64 {
    fn from_num(n: &Num) -> Self {
        n.value()
    }

    fn from_u64(n: u64) -> Self {
        n as f64
    }

    fn into_value(self) -> ExactValue {
        ExactValue {
            value: self,
            exact: None,
        }
    }
}

impl Scalar for BigRational {
    fn from_num(n: &Num) -> Self {
        let r = n.exact().expect("rational path needs exact inputs");
        BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
    }

    fn from_u64(n: u64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn into_value(self) -> ExactValue {
        ExactValue::from_rational(self)
    }
}

pub(crate) fn check_caps(inst: &Instance, caps: &OracleCaps) -> Result<(), OracleError> {
    let checks = [
        ("T", inst.horizon, caps.max_t),
        ("edges", inst.edges.len(), caps.max_edges),
        (
            "outcomes per edge",
            inst.edges.iter().map(|e| e.outcomes.len()).max().unwrap_or(0),
            caps.max_outcomes,
        ),
    ];
    for (what, value, cap) in checks {
        if value > cap {
            return Err(OracleError::CapsExceeded { what, value, cap });
        }
    }
    Ok(())
}

/// Edge data in the scalar type of the current computation.
pub(crate) struct EdgeTable<S> {
    pub support: Vec<usize>,
    /// `(probability, cost support, utility)` per outcome.
    pub outcomes: Vec<(S, Vec<usize>, S)>,
}

pub(crate) fn edge_tables<S: Scalar>(inst: &Instance) -> Vec<EdgeTable<S>> {
    inst.edges
        .iter()
        .map(|e| {
            EdgeTable {
                support: e.support(),
                outcomes: e
                    .outcomes
                    .iter()
                    .map(|o| (S::from_num(&o.prob), o.cost_support.clone(), S::from_num(&o.utility)))
                    .collect(),
            }
        })
        .collect()
}

pub(crate) fn is_safe(support: &[usize], budgets: &[u32]) -> bool {
    support.iter().all(|&k| budgets[k] > 0)
}

/// Budgets after outcome `cost` (assumed safe).
pub(crate) fn spend(budgets: &[u32], cost: &[usize]) -> Vec<u32> {
    let mut b = budgets.to_vec();
    for &k in cost {
        b[k] -= 1;
    }
    b
}
