//! Experiment manifests: every run is a pure function of its entry.

use crate::commands::{build_policy, load_instance, run_simulation, write_text};
use crate::report::{csv_field, csv_text, SimRow};
use crate::CliError;
use mbosm::bounds::{cr_lower, cr_upper, variance_bound, VariancePolicy, DEFAULT_SLACK};
use mbosm::instance::{generate, GenKind, GenParams, Instance};
use mbosm::policies::{PolicyKind, DEFAULT_REPLICAS};
use rayon::prelude::*;
use serde::Deserialize;
use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

pub const MANIFEST_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    /// Relative to the manifest's directory.
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Relative to `output_dir`.
    #[serde(default = "default_summary")]
    pub summary: PathBuf,
    #[serde(default)]
    pub slack: Option<f64>,
    pub runs: Vec<RunSpec>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_summary() -> PathBuf {
    PathBuf::from("summary.csv")
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub kind: String,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub name: String,
    /// Instance file, relative to the manifest's directory.
    #[serde(default)]
    pub instance: Option<PathBuf>,
    #[serde(default)]
    pub generator: Option<GeneratorSpec>,
    pub policy: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    pub episodes: usize,
    pub seed: u64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
}

fn default_alpha() -> f64 {
    1.0
}

fn default_replicas() -> usize {
    DEFAULT_REPLICAS
}

pub fn parse_manifest(text: &str) -> Result<Manifest, String> {
    let m: Manifest = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if m.schema_version != MANIFEST_SCHEMA_VERSION {
        return Err(format!(
            "schema_version {} unsupported (expected {})",
            m.schema_version, MANIFEST_SCHEMA_VERSION
        ));
    }
    let mut names = HashSet::new();
    for r in &m.runs {
        if r.name.is_empty() || r.name.contains(['/', '\\']) {
            return Err(format!("run name {:?} must be a non-empty file stem", r.name));
        }
        if !names.insert(r.name.as_str()) {
            return Err(format!("duplicate run name {:?}", r.name));
        }
        if r.instance.is_some() == r.generator.is_some() {
            return Err(format!("run {:?} needs exactly one of instance or generator", r.name));
        }
    }
    Ok(m)
}

fn resolve_instance(run: &RunSpec, base: &Path) -> Result<Instance, CliError> {
    if let Some(path) = &run.instance {
        return load_instance(&base.join(path));
    }
    let gspec = run.generator.as_ref().expect("checked by parse_manifest");
    let kind: GenKind = gspec
        .kind
        .parse()
        .map_err(|e: mbosm::instance::InstanceError| CliError::Runtime(format!("run {:?}: {}", run.name, e)))?;
    let mut params = GenParams::new();
    for (k, v) in &gspec.params {
        let text = match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        };
        params.set(k, text);
    }
    generate(kind, &params, gspec.seed).map_err(|e| CliError::Runtime(format!("run {:?}: {}", run.name, e)))
}

struct Outcome {
    row: SimRow,
    delta: usize,
    horizon: usize,
}

fn execute(run: &RunSpec, base: &Path, out_dir: &Path) -> Result<Outcome, CliError> {
    let kind: PolicyKind = run
        .policy
        .parse()
        .map_err(|e: String| CliError::Runtime(format!("run {:?}: {}", run.name, e)))?;
    let inst = resolve_instance(run, base)?;
    let topo = inst.topology().map_err(|e| CliError::Runtime(e.to_string()))?;
    let (policy, lp_objective) =
        build_policy(&inst, &topo, kind, run.alpha, run.replicas, run.seed).map_err(|e| e.context(&run.name))?;
    let est = run_simulation(&topo, &policy, run.episodes, run.seed, None).map_err(|e| e.context(&run.name))?;
    let row = SimRow::new(&inst.name, &policy, run.seed, &est, lp_objective);
    write_text(&out_dir.join(format!("{}.csv", run.name)), &csv_text(std::slice::from_ref(&row)))?;
    Ok(Outcome {
        row,
        delta: topo.sparsity,
        horizon: topo.horizon,
    })
}

const SUMMARY_COLUMNS: &str = "run,instance,policy,alpha,M,seed,mean_utility,utility_ci,lp_objective,empirical_cr,cr_lower,cr_upper,var_matches,var_ci,variance_bound,slack_c";

fn summary_line(name: &str, o: &Outcome, slack: f64) -> String {
    let r = &o.row;
    let (lower, vbound) = match r.alpha {
        Some(alpha) if o.delta > 0 => {
            let vp = if r.policy == "att" { VariancePolicy::Att } else { VariancePolicy::Samp };
            (
                cr_lower(alpha, o.delta).map(|v| v.to_string()).unwrap_or_default(),
                variance_bound(vp, alpha, o.delta, o.horizon, slack).to_string(),
            )
        }
        _ => (String::new(), String::new()),
    };
    let upper = if o.delta > 0 { cr_upper(o.delta).to_string() } else { String::new() };
    [
        csv_field(name),
        csv_field(&r.instance),
        r.policy.to_string(),
        r.alpha.map(|a| a.to_string()).unwrap_or_default(),
        r.est.episodes.to_string(),
        r.seed.to_string(),
        r.est.mean_utility.to_string(),
        r.est.utility_ci.to_string(),
        r.lp_objective.to_string(),
        r.empirical_cr().to_string(),
        lower,
        upper,
        r.est.var_matches.to_string(),
        r.est.var_ci.to_string(),
        vbound,
        slack.to_string(),
    ]
    .join(",")
}

/// Run all entries (in parallel), then write the summary in manifest order.
pub fn campaign(path: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {}", path.display(), e)))?;
    let manifest = parse_manifest(&text).map_err(|e| CliError::Runtime(format!("{}: {}", path.display(), e)))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let out_dir = base.join(&manifest.output_dir);
    std::fs::create_dir_all(&out_dir).map_err(|e| CliError::Runtime(format!("{}: {}", out_dir.display(), e)))?;
    let outcomes = manifest
        .runs
        .par_iter()
        .map(|run| execute(run, base, &out_dir))
        .collect::<Result<Vec<_>, _>>()?;
    let slack = manifest.slack.unwrap_or(DEFAULT_SLACK);
    let mut summary = format!("# mbosm campaign summary v1\n{}\n", SUMMARY_COLUMNS);
    for (run, o) in manifest.runs.iter().zip(&outcomes) {
        summary.push_str(&summary_line(&run.name, o, slack));
        summary.push('\n');
    }
    let summary_path = out_dir.join(&manifest.summary);
    write_text(&summary_path, &summary)?;
    println!("{} runs; summary at {}", outcomes.len(), summary_path.display());
    Ok(())
}
