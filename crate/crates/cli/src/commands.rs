use crate::args::{BbinsArgs, BoundsArgs, GenArgs, MethodArg, OptArgs, SimulateArgs};
use crate::report::{append_csv, SimRow, JSON_SCHEMA_VERSION};
use crate::CliError;
use mbosm::bounds::{cr_lower, cr_upper, find_eta, g, kappa_bracket, large_budget_ratio, variance_bound, BoundValue, VariancePolicy};
use mbosm::engine::{estimate_performance, run_episode, summarize, EpisodeSummary, PerfEstimate};
use mbosm::instance::{generate, load, save, to_json, validate_instance, GenParams, Instance, Topology};
use mbosm::lp::{build_benchmark_lp, solve_lp, LpSolution, DEFAULT_TOL};
use mbosm::oracle::{bbins_ratio, clairvoyant_opt, exact_policy_value, BbMethod, BbParams, ExactPolicy};
use mbosm::policies::{AttPolicy, BaselineKind, Policy, PolicyKind, SampTable};
use rayon::prelude::*;
use serde_json::json;
use std::io::Write;
use std::path::Path;

/// Load an instance and reject it unless it validates.
pub fn load_instance(path: &Path) -> Result<Instance, CliError> {
    let inst = load(path).map_err(|e| CliError::Runtime(e.to_string()))?;
    let report = validate_instance(&inst);
    if !report.is_empty() {
        return Err(CliError::Runtime(format!("{}: invalid instance: {}", path.display(), report)));
    }
    Ok(inst)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {}", path.display(), e)))
}

fn solve(inst: &Instance) -> Result<LpSolution, CliError> {
    let model = build_benchmark_lp(inst).map_err(|e| CliError::Runtime(e.to_string()))?;
    solve_lp(&model, DEFAULT_TOL).map_err(|e| CliError::Runtime(e.to_string()))
}

/// The ready policy and the LP objective it is compared against.
pub fn build_policy(
    inst: &Instance,
    topo: &Topology,
    kind: PolicyKind,
    alpha: f64,
    replicas: usize,
    seed: u64,
) -> Result<(Policy, f64), CliError> {
    let sol = solve(inst)?;
    let err = |e: mbosm::policies::PolicyError| CliError::Runtime(e.to_string());
    let policy = match kind {
        PolicyKind::Samp => Policy::Samp(SampTable::new(topo, &sol.x_star, alpha).map_err(err)?),
        PolicyKind::Att => {
            let samp = SampTable::new(topo, &sol.x_star, alpha).map_err(err)?;
            Policy::Att(AttPolicy::new(topo, samp, replicas, seed).map_err(err)?)
        }
        PolicyKind::Greedy => Policy::Baseline(BaselineKind::Greedy),
        PolicyKind::Ranking => Policy::Baseline(BaselineKind::Ranking),
    };
    Ok((policy, sol.objective))
}

pub fn gen(args: &GenArgs) -> Result<(), CliError> {
    let mut params = GenParams::new();
    for p in &args.params {
        params
            .insert_pair(p)
            .map_err(|e| CliError::Usage(format!("--param {}: {}", p, e)))?;
    }
    let inst = generate(args.kind, &params, args.seed).map_err(|e| CliError::Runtime(e.to_string()))?;
    match &args.out {
        Some(path) => save(&inst, path).map_err(|e| CliError::Runtime(e.to_string())),
        None => {
            print!("{}", to_json(&inst));
            Ok(())
        }
    }
}

pub fn validate(path: &Path) -> Result<(), CliError> {
    let inst = load_instance(path)?;
    println!(
        "{}: ok ({} agents, {} offline, {} edges, K={}, T={}, delta={})",
        path.display(),
        inst.online.len(),
        inst.offline.len(),
        inst.edges.len(),
        inst.resources,
        inst.horizon,
        inst.sparsity()
    );
    Ok(())
}

pub fn lp(path: &Path) -> Result<(), CliError> {
    let inst = load_instance(path)?;
    let model = build_benchmark_lp(&inst).map_err(|e| CliError::Runtime(e.to_string()))?;
    let sol = solve_lp(&model, DEFAULT_TOL).map_err(|e| CliError::Runtime(e.to_string()))?;
    let x: serde_json::Map<String, serde_json::Value> = model
        .column_labels
        .iter()
        .zip(&sol.x_star)
        .map(|(l, v)| (l.clone(), json!(v)))
        .collect();
    let binding: Vec<&str> = sol.binding.iter().map(|&r| model.row_labels[r].as_str()).collect();
    let out = json!({
        "schema_version": JSON_SCHEMA_VERSION,
        "instance": inst.name,
        "status": format!("{:?}", sol.status).to_lowercase(),
        "objective": sol.objective,
        "x_star": x,
        "binding": binding,
        "iterations": sol.iterations,
    });
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(())
}

/// Run `episodes` episodes; with a trace path, every episode is recorded
/// and written as one JSON line.
pub fn run_simulation(
    topo: &Topology,
    policy: &Policy,
    episodes: usize,
    seed: u64,
    trace: Option<&Path>,
) -> Result<PerfEstimate, CliError> {
    let runtime = |e: mbosm::engine::EngineError| CliError::Runtime(e.to_string());
    let Some(path) = trace else {
        return estimate_performance(topo, policy, episodes, seed).map_err(runtime);
    };
    if episodes < 2 {
        return Err(CliError::Usage(format!("--episodes {} (need at least 2)", episodes)));
    }
    let results = (0..episodes as u64)
        .into_par_iter()
        .map(|m| run_episode(topo, policy, seed, m, true))
        .collect::<Result<Vec<_>, _>>()
        .map_err(runtime)?;
    let file = std::fs::File::create(path).map_err(|e| CliError::Runtime(format!("{}: {}", path.display(), e)))?;
    let mut w = std::io::BufWriter::new(file);
    for r in &results {
        serde_json::to_writer(&mut w, r).expect("serializable");
        writeln!(w).map_err(|e| CliError::Runtime(format!("{}: {}", path.display(), e)))?;
    }
    w.flush().map_err(|e| CliError::Runtime(format!("{}: {}", path.display(), e)))?;
    let summaries: Vec<EpisodeSummary> = results
        .iter()
        .map(|r| EpisodeSummary {
            total_utility: r.total_utility,
            match_count: r.match_count,
            clamped_coins: r.clamped_coins,
        })
        .collect();
    Ok(summarize(policy, &summaries))
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    if !(0.0..=1.0).contains(&args.alpha) {
        return Err(CliError::Usage(format!("--alpha {} must lie in [0, 1]", args.alpha)));
    }
    let inst = load_instance(&args.file)?;
    let topo = inst.topology().map_err(|e| CliError::Runtime(e.to_string()))?;
    let (policy, lp_objective) = build_policy(&inst, &topo, args.policy, args.alpha, args.replicas, args.seed)?;
    let est = run_simulation(&topo, &policy, args.episodes, args.seed, args.trace.as_deref())?;
    let row = SimRow::new(&inst.name, &policy, args.seed, &est, lp_objective);
    match &args.out {
        Some(path) => append_csv(path, &[row]),
        None => {
            print!("{}", crate::report::csv_text(&[row]));
            Ok(())
        }
    }
}

pub fn opt(args: &OptArgs) -> Result<(), CliError> {
    let inst = load_instance(&args.file)?;
    let caps = args.caps.caps();
    let runtime = |e: mbosm::oracle::OracleError| CliError::Runtime(e.to_string());
    let opt = clairvoyant_opt(&inst, &caps).map_err(runtime)?;
    let greedy = exact_policy_value(&inst, ExactPolicy::Greedy, &caps).map_err(runtime)?;
    let ratio = greedy.ratio(&opt);
    let mut out = json!({
        "schema_version": JSON_SCHEMA_VERSION,
        "instance": inst.name,
        "clairvoyant": opt.to_string(),
        "greedy": greedy.to_string(),
        "ratio": ratio.to_string(),
        "value": opt.value,
        "method": if opt.is_exact() { "exact_rational" } else { "exact_float" },
        "caps_used": {
            "max_states": caps.max_states,
            "max_T": caps.max_t,
            "max_edges": caps.max_edges,
            "max_outcomes": caps.max_outcomes,
        },
        "ci": 0.0,
    });
    if let Some(alpha) = args.alpha {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CliError::Usage(format!("--alpha {} must lie in [0, 1]", alpha)));
        }
        let topo = inst.topology().map_err(|e| CliError::Runtime(e.to_string()))?;
        let sol = solve(&inst)?;
        let table = SampTable::new(&topo, &sol.x_star, alpha).map_err(|e| CliError::Runtime(e.to_string()))?;
        let samp = exact_policy_value(&inst, ExactPolicy::Samp(&table), &caps).map_err(runtime)?;
        out["samp"] = json!({ "alpha": alpha, "value": samp.value, "ratio": samp.value / opt.value });
    }
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(())
}

pub fn bbins(args: &BbinsArgs) -> Result<(), CliError> {
    let params = BbParams::new(args.delta, args.b, args.t).map_err(|e| CliError::Usage(e.to_string()))?;
    let method = match args.method {
        MethodArg::Exact => BbMethod::Exact,
        MethodArg::Mc => BbMethod::Mc {
            samples: args.samples,
            seed: args.seed,
        },
    };
    let est = bbins_ratio(params, method, args.max_states).map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut out = json!({
        "schema_version": JSON_SCHEMA_VERSION,
        "delta": args.delta,
        "B": args.b,
        "T": args.t,
        "value": est.value,
        "ci": est.ci,
        "method": est.method.name(),
        "caps_used": { "max_states": args.max_states, "states": est.states },
    });
    if let BbMethod::Mc { samples, seed } = est.method {
        out["samples"] = json!(samples);
        out["seed"] = json!(seed);
        out["fallback"] = json!(args.method == MethodArg::Exact);
    }
    println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
    Ok(())
}

pub fn bounds(args: &BoundsArgs) -> Result<(), CliError> {
    let usage = |e: mbosm::bounds::BoundsError| CliError::Usage(e.to_string());
    let d = args.delta;
    let mut rows: Vec<(String, String, String)> = Vec::new();
    let lower = cr_lower(args.alpha, d).map_err(usage)?;
    rows.push(("cr_lower".into(), format!("{:.6}", lower), "(1-e^{-alpha*delta})/delta".into()));
    rows.push(("cr_upper".into(), format!("{:.6}", cr_upper(d)), "no online algorithm does better".into()));
    let eta = find_eta(1e-12);
    rows.push(("eta".into(), format!("{:.6}", eta), "maximizer of g".into()));
    let (vp, arg) = match args.policy {
        PolicyKind::Att => (Some(VariancePolicy::Att), args.alpha * d as f64),
        PolicyKind::Samp => (Some(VariancePolicy::Samp), (args.alpha * d as f64).min(eta)),
        _ => (None, 0.0),
    };
    if let Some(vp) = vp {
        rows.push((format!("g({:.6})", arg), format!("{:.6}", g(arg)), "variance envelope".into()));
        if let Some(t) = args.t {
            rows.push((
                "variance_bound".into(),
                format!("{:.6}", variance_bound(vp, args.alpha, d, t, args.slack)),
                format!("(alpha*T)^2 g + {}*T", args.slack),
            ));
        }
    }
    if let Some(b) = args.b {
        let r = large_budget_ratio(d, b).map_err(usage)?;
        let value = match r.value {
            BoundValue::Point(v) => format!("{:.6}", v),
            BoundValue::Bracket { lower, upper } => format!("[{:.6}, {:.6}]", lower, upper),
        };
        rows.push(("large_budget_ratio".into(), value, r.note));
    }
    let (k_lo, k_hi) = kappa_bracket();
    rows.push(("kappa".into(), format!("({:.6}, {:.6}]", k_lo, k_hi), "large-budget constant".into()));
    let fmt_opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
    println!(
        "# bounds policy={} alpha={} delta={} B={} T={} slack={}",
        args.policy,
        args.alpha,
        d,
        fmt_opt(args.b.map(|b| b.to_string())),
        fmt_opt(args.t.map(|t| t.to_string())),
        args.slack
    );
    println!("{:<20} {:<24} note", "name", "value");
    for (name, value, note) in rows {
        println!("{:<20} {:<24} {}", name, value, note);
    }
    Ok(())
}
