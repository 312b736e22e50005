//! Problem data: bipartite graph, budgeted resources, arrival law and the
//! joint (cost, utility) outcome table of every edge.

mod generate;
mod io;
mod projective;
mod topology;
mod validate;

pub use generate::{generate, GenKind, GenParams};
pub use io::{from_json, load, save, to_json, SCHEMA_VERSION};
pub use projective::{build_projective_plane, is_prime, Hypergraph};
pub use topology::Topology;
pub use validate::{validate_instance, ValidationReport, Violation, ViolationKind};

use num_rational::Ratio;
use num_traits::ToPrimitive;
use thiserror::Error;

pub const PROB_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("invalid instance: {0}")]
    Invalid(ValidationReport),
    #[error("projective plane order {0} is not prime")]
    NonPrimeOrder(u64),
    #[error("horizon {horizon} is not divisible by {lines}")]
    IndivisibleHorizon { horizon: usize, lines: usize },
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("instance json: {0}")]
    Json(#[from] serde_json::Error),
}

/// A real number that optionally remembers an exact rational value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num {
    value: f64,
    exact: Option<Ratio<i64>>,
}

impl Num {
    pub fn ratio(num: i64, den: i64) -> Self {
        let r = Ratio::new(num, den);
        Num {
            value: r.to_f64().unwrap_or(f64::NAN),
            exact: Some(r),
        }
    }

    pub fn int(v: i64) -> Self {
        Num::ratio(v, 1)
    }

    pub fn float(value: f64) -> Self {
        Num { value, exact: None }
    }

    /// Exact when `value` is a short decimal that round-trips, float otherwise.
    pub fn from_decimal(value: f64) -> Self {
        if value.is_finite() {
            if let Some(r) = Ratio::<i64>::approximate_float(value) {
                if *r.denom() <= 1_000_000 && r.to_f64() == Some(value) {
                    return Num { value, exact: Some(r) };
                }
            }
        }
        Num::float(value)
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<Ratio<i64>> {
        self.exact
    }
}

impl From<f64> for Num {
    fn from(v: f64) -> Self {
        Num::float(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutcomeEntry {
    pub prob: Num,
    /// Resources consumed by this realization (0-based, sorted).
    pub cost_support: Vec<usize>,
    pub utility: Num,
}

impl OutcomeEntry {
    pub fn new(prob: Num, mut cost_support: Vec<usize>, utility: Num) -> Self {
        cost_support.sort_unstable();
        OutcomeEntry {
            prob,
            cost_support,
            utility,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpec {
    pub offline_id: String,
    pub online_id: String,
    pub outcomes: Vec<OutcomeEntry>,
}

impl EdgeSpec {
    /// Resources that some positive-probability outcome consumes.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .outcomes
            .iter()
            .filter(|o| o.prob.value() > 0.0)
            .flat_map(|o| o.cost_support.iter().copied())
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    pub fn expected_utility(&self) -> f64 {
        self.outcomes
            .iter()
            .map(|o| o.prob.value() * o.utility.value())
            .sum()
    }

    /// `E[A_{e,k}]`.
    pub fn expected_cost(&self, k: usize) -> f64 {
        self.outcomes
            .iter()
            .filter(|o| o.cost_support.binary_search(&k).is_ok())
            .map(|o| o.prob.value())
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OnlineAgent {
    pub id: String,
    pub p: Num,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub name: String,
    pub horizon: usize,
    pub resources: usize,
    pub budgets: Vec<u32>,
    pub online: Vec<OnlineAgent>,
    pub offline: Vec<String>,
    pub edges: Vec<EdgeSpec>,
}

impl Instance {
    /// Arrival rate `r_j = T p_j` of the agent at position `j`.
    pub fn rate(&self, j: usize) -> f64 {
        self.horizon as f64 * self.online[j].p.value()
    }

    pub fn sparsity(&self) -> usize {
        sparsity(self)
    }

    pub fn min_budget(&self) -> u32 {
        self.budgets.iter().copied().min().unwrap_or(0)
    }

    /// True when every probability and utility carries an exact rational.
    pub fn is_exact(&self) -> bool {
        self.online.iter().all(|a| a.p.exact().is_some())
            && self.edges.iter().all(|e| {
                e.outcomes
                    .iter()
                    .all(|o| o.prob.exact().is_some() && o.utility.exact().is_some())
            })
    }

    pub fn topology(&self) -> Result<Topology, InstanceError> {
        let report = validate_instance(self);
        if !report.is_empty() {
            return Err(InstanceError::Invalid(report));
        }
        Ok(Topology::build(self))
    }
}

/// Largest edge support size; 0 without edges.
pub fn sparsity(inst: &Instance) -> usize {
    inst.edges.iter().map(|e| e.support().len()).max().unwrap_or(0)
}
