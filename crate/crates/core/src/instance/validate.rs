use super::{Instance, PROB_TOL};
use std::collections::HashSet;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    Horizon,
    Budget,
    ArrivalProbability,
    ArrivalSum,
    DuplicateId,
    UnknownEndpoint,
    DuplicateEdge,
    OutcomeProbability,
    OutcomeSum,
    Utility,
    CostIndex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub message: String,
}

/// Every invariant an instance breaks. Empty means valid.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }

    fn push(&mut self, kind: ViolationKind, message: String) {
        self.violations.push(Violation { kind, message });
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, v) in self.violations.iter().enumerate() {
            if n > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}", v.message)?;
        }
        Ok(())
    }
}

/// Short decimal for messages: 12 significant digits, trailing zeros dropped.
fn short(x: f64) -> String {
    let s = format!("{:.12}", x);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

pub fn validate_instance(inst: &Instance) -> ValidationReport {
    use ViolationKind::*;
    let mut report = ValidationReport::default();

    if inst.horizon == 0 {
        report.push(Horizon, "horizon T must be positive".into());
    }
    if inst.budgets.len() != inst.resources {
        report.push(
            Budget,
            format!(
                "{} budgets given for {} resources",
                inst.budgets.len(),
                inst.resources
            ),
        );
    }
    for (k, &b) in inst.budgets.iter().enumerate() {
        if b == 0 {
            report.push(Budget, format!("budget of resource {} must be positive", k));
        }
    }

    let mut online_ids = HashSet::new();
    let mut sum = 0.0;
    for a in &inst.online {
        let p = a.p.value();
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            report.push(
                ArrivalProbability,
                format!("arrival probability of agent {} is {} (outside [0,1])", a.id, short(p)),
            );
        }
        sum += p;
        if !online_ids.insert(a.id.as_str()) {
            report.push(DuplicateId, format!("duplicate online id {}", a.id));
        }
    }
    if (sum - 1.0).abs() > PROB_TOL {
        report.push(ArrivalSum, format!("arrival probabilities sum {} ≠ 1", short(sum)));
    }

    let mut offline_ids = HashSet::new();
    for id in &inst.offline {
        if !offline_ids.insert(id.as_str()) {
            report.push(DuplicateId, format!("duplicate offline id {}", id));
        }
    }

    let mut pairs = HashSet::new();
    for (n, e) in inst.edges.iter().enumerate() {
        let name = format!("edge {} ({},{})", n, e.offline_id, e.online_id);
        if !offline_ids.contains(e.offline_id.as_str()) {
            report.push(UnknownEndpoint, format!("{} references unknown offline id", name));
        }
        if !online_ids.contains(e.online_id.as_str()) {
            report.push(UnknownEndpoint, format!("{} references unknown online id", name));
        }
        if !pairs.insert((e.offline_id.as_str(), e.online_id.as_str())) {
            report.push(DuplicateEdge, format!("{} duplicates an earlier pair", name));
        }
        let mut total = 0.0;
        for (m, o) in e.outcomes.iter().enumerate() {
            let p = o.prob.value();
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                report.push(
                    OutcomeProbability,
                    format!("{} outcome {} has probability {}", name, m, short(p)),
                );
            }
            total += p;
            let u = o.utility.value();
            if !(u >= 0.0 && u.is_finite()) {
                report.push(Utility, format!("{} outcome {} has utility {}", name, m, short(u)));
            }
            let mut prev: Option<usize> = None;
            for &k in &o.cost_support {
                if k >= inst.resources {
                    report.push(
                        CostIndex,
                        format!("{} outcome {} consumes resource {} ≥ K={}", name, m, k, inst.resources),
                    );
                }
                if prev.is_some_and(|p| p >= k) {
                    report.push(
                        CostIndex,
                        format!("{} outcome {} cost support not strictly increasing", name, m),
                    );
                }
                prev = Some(k);
            }
        }
        if (total - 1.0).abs() > PROB_TOL {
            report.push(
                OutcomeSum,
                format!("{} outcome probabilities sum {} ≠ 1", name, short(total)),
            );
        }
    }
    report
}
