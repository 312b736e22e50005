//! Instance files. Numbers are stored as `(num, den)` pairs when exact and
//! as plain decimals otherwise; both forms load.

use super::{EdgeSpec, Instance, InstanceError, Num, OnlineAgent, OutcomeEntry};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
struct FileInstance {
    schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    T: usize,
    K: usize,
    budgets: Vec<u32>,
    online: Vec<FileAgent>,
    offline: Vec<String>,
    edges: Vec<FileEdge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileAgent {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_num: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_den: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileEdge {
    i: String,
    j: String,
    outcomes: Vec<FileOutcome>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileOutcome {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_num: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p_den: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    cost: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    utility_num: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    utility_den: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    utility: Option<f64>,
}

fn split(n: Num) -> (Option<i64>, Option<i64>, Option<f64>) {
    match n.exact() {
        Some(r) => (Some(*r.numer()), Some(*r.denom()), None),
        None => (None, None, Some(n.value())),
    }
}

fn join(
    what: &str,
    num: Option<i64>,
    den: Option<i64>,
    dec: Option<f64>,
) -> Result<Num, InstanceError> {
    let bad = |m: &str| InstanceError::BadParams(format!("{}: {}", what, m));
    match (num, den, dec) {
        (Some(_), Some(0), None) => Err(bad("zero denominator")),
        (Some(n), Some(d), None) => Ok(Num::ratio(n, d)),
        (None, None, Some(v)) => Ok(Num::float(v)),
        (None, None, None) => Err(bad("missing value")),
        (_, _, Some(_)) => Err(bad("give either a num/den pair or a decimal, not both")),
        _ => Err(bad("numerator and denominator must both be present")),
    }
}

pub fn to_json(inst: &Instance) -> String {
    let file = FileInstance {
        schema_version: SCHEMA_VERSION,
        name: Some(inst.name.clone()),
        T: inst.horizon,
        K: inst.resources,
        budgets: inst.budgets.clone(),
        online: inst
            .online
            .iter()
            .map(|a| {
                let (p_num, p_den, p) = split(a.p);
                FileAgent {
                    id: a.id.clone(),
                    p_num,
                    p_den,
                    p,
                }
            })
            .collect(),
        offline: inst.offline.clone(),
        edges: inst
            .edges
            .iter()
            .map(|e| FileEdge {
                i: e.offline_id.clone(),
                j: e.online_id.clone(),
                outcomes: e
                    .outcomes
                    .iter()
                    .map(|o| {
                        let (p_num, p_den, p) = split(o.prob);
                        let (utility_num, utility_den, utility) = split(o.utility);
                        FileOutcome {
                            p_num,
                            p_den,
                            p,
                            cost: o.cost_support.clone(),
                            utility_num,
                            utility_den,
                            utility,
                        }
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
    s.push('\n');
    s
}

/// Parse an instance. Structural JSON errors fail here; model invariants are
/// checked separately by `validate_instance`.
pub fn from_json(text: &str) -> Result<Instance, InstanceError> {
    let file: FileInstance = serde_json::from_str(text)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(InstanceError::BadParams(format!(
            "unsupported schema_version {} (expected {})",
            file.schema_version, SCHEMA_VERSION
        )));
    }
    let online = file
        .online
        .into_iter()
        .map(|a| {
            let p = join(&format!("online {} p", a.id), a.p_num, a.p_den, a.p)?;
            Ok(OnlineAgent { id: a.id, p })
        })
        .collect::<Result<_, InstanceError>>()?;
    let edges = file
        .edges
        .into_iter()
        .enumerate()
        .map(|(n, e)| {
            let outcomes = e
                .outcomes
                .into_iter()
                .enumerate()
                .map(|(m, o)| {
                    let what = format!("edge {} outcome {}", n, m);
                    let prob = join(&format!("{} p", what), o.p_num, o.p_den, o.p)?;
                    let utility = join(
                        &format!("{} utility", what),
                        o.utility_num,
                        o.utility_den,
                        o.utility,
                    )?;
                    Ok(OutcomeEntry {
                        prob,
                        cost_support: o.cost,
                        utility,
                    })
                })
                .collect::<Result<_, InstanceError>>()?;
            Ok(EdgeSpec {
                offline_id: e.i,
                online_id: e.j,
                outcomes,
            })
        })
        .collect::<Result<_, InstanceError>>()?;
    Ok(Instance {
        name: file.name.unwrap_or_else(|| "instance".into()),
        horizon: file.T,
        resources: file.K,
        budgets: file.budgets,
        online,
        offline: file.offline,
        edges,
    })
}

pub fn load(path: impl AsRef<Path>) -> Result<Instance, InstanceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })?;
    from_json(&text)
}

pub fn save(inst: &Instance, path: impl AsRef<Path>) -> Result<(), InstanceError> {
    let path = path.as_ref();
    std::fs::write(path, to_json(inst)).map_err(|source| InstanceError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate, validate_instance, GenKind, GenParams};

    #[test]
    fn round_trip_keeps_rationals() {
        for (kind, p) in [
            (GenKind::Toy1, GenParams::new()),
            (GenKind::Random, GenParams::new()),
            (GenKind::StarZero, GenParams::new().with("n", 5).with("eps", 0.01)),
        ] {
            let inst = generate(kind, &p, 9).unwrap();
            let back = from_json(&to_json(&inst)).unwrap();
            assert_eq!(back, inst);
        }
    }

    #[test]
    fn decimal_fields_load() {
        let text = r#"{"schema_version":1,"T":2,"K":1,"budgets":[1],
            "online":[{"id":"a","p":0.25},{"id":"b","p_num":3,"p_den":4}],
            "offline":["x"],
            "edges":[{"i":"x","j":"a","outcomes":[{"p":1.0,"cost":[0],"utility":0.5}]}]}"#;
        let inst = from_json(text).unwrap();
        assert!(validate_instance(&inst).is_empty());
        assert_eq!(inst.online[0].p.value(), 0.25);
        assert!(inst.online[1].p.exact().is_some());
        assert_eq!(inst.name, "instance");
    }

    #[test]
    fn malformed_numbers_rejected() {
        let both = r#"{"schema_version":1,"T":1,"K":0,"budgets":[],
            "online":[{"id":"a","p":1.0,"p_num":1,"p_den":1}],"offline":[],"edges":[]}"#;
        assert!(from_json(both).is_err());
        let zero = r#"{"schema_version":1,"T":1,"K":0,"budgets":[],
            "online":[{"id":"a","p_num":1,"p_den":0}],"offline":[],"edges":[]}"#;
        assert!(from_json(zero).is_err());
        let version = r#"{"schema_version":2,"T":1,"K":0,"budgets":[],
            "online":[],"offline":[],"edges":[]}"#;
        assert!(from_json(version).is_err());
    }

    #[test]
    fn missing_file_error_carries_path() {
        let err = load("/nonexistent/inst.json").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/inst.json"));
    }
}
