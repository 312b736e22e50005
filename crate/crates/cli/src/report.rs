use crate::CliError;
use mbosm::engine::PerfEstimate;
use mbosm::policies::Policy;
use std::io::Write;
use std::path::Path;

pub const JSON_SCHEMA_VERSION: u32 = 1;

/// Version line written above every simulation CSV header.
pub const CSV_VERSION_LINE: &str = "# mbosm simulate csv v1";

pub const CSV_COLUMNS: [&str; 12] = [
    "instance",
    "policy",
    "alpha",
    "M",
    "seed",
    "mean_utility",
    "utility_ci",
    "mean_matches",
    "var_matches",
    "var_ci",
    "lp_objective",
    "empirical_cr",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SimRow {
    pub instance: String,
    pub policy: &'static str,
    pub alpha: Option<f64>,
    pub seed: u64,
    pub est: PerfEstimate,
    pub lp_objective: f64,
}

impl SimRow {
    pub fn new(instance: &str, policy: &Policy, seed: u64, est: &PerfEstimate, lp_objective: f64) -> SimRow {
        SimRow {
            instance: instance.to_string(),
            policy: policy.label(),
            alpha: policy.alpha(),
            seed,
            est: est.clone(),
            lp_objective,
        }
    }

    pub fn empirical_cr(&self) -> f64 {
        if self.lp_objective > 0.0 {
            self.est.mean_utility / self.lp_objective
        } else {
            f64::NAN
        }
    }

    pub fn fields(&self) -> Vec<String> {
        vec![
            csv_field(&self.instance),
            self.policy.to_string(),
            self.alpha.map(|a| a.to_string()).unwrap_or_default(),
            self.est.episodes.to_string(),
            self.seed.to_string(),
            self.est.mean_utility.to_string(),
            self.est.utility_ci.to_string(),
            self.est.mean_matches.to_string(),
            self.est.var_matches.to_string(),
            self.est.var_ci.to_string(),
            self.lp_objective.to_string(),
            self.empirical_cr().to_string(),
        ]
    }
}

/// Quote a field when it holds a comma, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn csv_header() -> String {
    format!("{}\n{}\n", CSV_VERSION_LINE, CSV_COLUMNS.join(","))
}

pub fn csv_text(rows: &[SimRow]) -> String {
    let mut s = csv_header();
    for r in rows {
        s.push_str(&r.fields().join(","));
        s.push('\n');
    }
    s
}

/// Append rows, writing the header first when the file is new or empty.
pub fn append_csv(path: &Path, rows: &[SimRow]) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Runtime(format!("{}: {}", path.display(), e));
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = std::fs::OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
    let mut text = if fresh { csv_header() } else { String::new() };
    for r in rows {
        text.push_str(&r.fields().join(","));
        text.push('\n');
    }
    f.write_all(text.as_bytes()).map_err(io)
}
