use std::path::Path;
use std::process::{Command, Output};

fn mbosm(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mbosm"))
        .args(args)
        .current_dir(dir)
        .env_remove("MBOSM_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = mbosm(args, dir);
    assert!(out.status.success(), "{:?}: {}", args, String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str], dir: &Path) -> serde_json::Value {
    serde_json::from_str(&ok(args, dir)).unwrap()
}

#[test]
fn toy1_opt_reports_exact_fractions() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--kind", "toy1", "--out", "toy1.json"], dir.path());
    let v = json(&["opt", "toy1.json"], dir.path());
    assert_eq!(v["clairvoyant"], "13/9");
    assert_eq!(v["greedy"], "4/3");
    assert_eq!(v["ratio"], "12/13");
    assert_eq!(v["method"], "exact_rational");
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn opt_with_alpha_adds_samp_value() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--kind", "cr_worst", "-p", "delta=1", "-p", "T=3", "--out", "c.json"], dir.path());
    let v = json(&["opt", "c.json", "--alpha", "1"], dir.path());
    // Safe at round t with probability (2/3)^{t-1}.
    let want = 1.0 + 2.0 / 3.0 + 4.0 / 9.0;
    assert!((v["samp"]["value"].as_f64().unwrap() - want).abs() < 1e-12);
}

#[test]
fn opt_respects_caps() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--kind", "cr_worst", "-p", "delta=2", "-p", "T=40", "--out", "big.json"], dir.path());
    let out = mbosm(&["opt", "big.json", "--max-T", "8"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gen_output_round_trips_through_validate_and_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gen", "--kind", "random", "-p", "n_offline=3", "-p", "n_online=4", "-p", "T=12", "--seed", "9"];
    let stdout = ok(&args, dir.path());
    let mut with_out = args.to_vec();
    with_out.extend(["--out", "r.json"]);
    ok(&with_out, dir.path());
    let file = std::fs::read_to_string(dir.path().join("r.json")).unwrap();
    let a: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let b: serde_json::Value = serde_json::from_str(&file).unwrap();
    assert_eq!(a, b);
    assert!(ok(&["validate", "r.json"], dir.path()).contains("ok"));
}

#[test]
fn invalid_instance_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--kind", "toy1", "--out", "t.json"], dir.path());
    let text = std::fs::read_to_string(dir.path().join("t.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["T"] = serde_json::json!(0);
    std::fs::write(dir.path().join("bad.json"), v.to_string()).unwrap();
    assert_eq!(mbosm(&["validate", "bad.json"], dir.path()).status.code(), Some(2));
    assert_eq!(mbosm(&["validate", "missing.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn lp_json_lists_solution_by_edge_label() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--kind", "toy1", "--out", "toy1.json"], dir.path());
    let v = json(&["lp", "toy1.json"], dir.path());
    assert_eq!(v["status"], "optimal");
    assert!((v["objective"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let x = v["x_star"].as_object().unwrap();
    let total: f64 = x.values().map(|e| e.as_f64().unwrap()).sum();
    assert!((total - 2.0).abs() < 1e-12);
}

#[test]
fn simulate_is_byte_reproducible_and_independent_of_threads() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--kind", "cr_worst", "-p", "delta=2", "-p", "T=30", "--out", "c.json"], dir.path());
    for policy in ["samp", "att", "greedy", "ranking"] {
        let args = ["simulate", "c.json", "--policy", policy, "--episodes", "3000", "--seed", "5", "--replicas", "1000"];
        let a = ok(&args, dir.path());
        let b = ok(&args, dir.path());
        assert_eq!(a, b, "{policy}");
        let threaded = Command::new(env!("CARGO_BIN_EXE_mbosm"))
            .args(args)
            .current_dir(dir.path())
            .env("MBOSM_THREADS", "3")
            .output()
            .unwrap();
        assert_eq!(String::from_utf8(threaded.stdout).unwrap(), a, "{policy} threads");
        let mut lines = a.lines();
        assert!(lines.next().unwrap().starts_with('#'));
        assert!(lines.next().unwrap().starts_with("instance,policy,alpha,M,seed"));
        assert_eq!(lines.next().unwrap().split(',').nth(1), Some(policy));
    }
}

#[test]
fn simulate_appends_to_csv_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--kind", "toy1", "--out", "toy1.json"], dir.path());
    for seed in ["1", "2"] {
        ok(
            &["simulate", "toy1.json", "--policy", "samp", "--episodes", "500", "--seed", seed, "--out", "o.csv"],
            dir.path(),
        );
    }
    let csv = std::fs::read_to_string(dir.path().join("o.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert_eq!(csv.lines().filter(|l| l.starts_with('#')).count(), 1);

    let plain = ok(&["simulate", "toy1.json", "--policy", "greedy", "--episodes", "400", "--seed", "4"], dir.path());
    let traced = ok(
        &["simulate", "toy1.json", "--policy", "greedy", "--episodes", "400", "--seed", "4", "--trace", "t.jsonl"],
        dir.path(),
    );
    assert_eq!(plain, traced);
    let trace = std::fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    assert_eq!(trace.lines().count(), 400);
    let mut total = 0.0;
    for (m, line) in trace.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["stream"], m as u64);
        total += v["total_utility"].as_f64().unwrap();
    }
    let mean: f64 = plain.lines().nth(2).unwrap().split(',').nth(5).unwrap().parse().unwrap();
    assert!((total / 400.0 - mean).abs() < 1e-12);
}

#[test]
fn bounds_table_contains_samp_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&["bounds", "--policy", "samp", "--alpha", "1", "--delta", "2", "--T", "1000"], dir.path());
    assert!(out.contains("0.432332"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("variance_bound")));
    assert!(!out.lines().any(|l| l.starts_with("large_budget_ratio")));
}

#[test]
fn bbins_exact_and_mc_json() {
    let dir = tempfile::tempdir().unwrap();
    let ex = json(&["bbins", "--delta", "1", "--B", "1", "--T", "10"], dir.path());
    // One bin of size one survives t-1 throws with probability (1-p)^{t-1}.
    let p = 0.1f64;
    let want = (1.0 - (1.0 - p).powi(10)) / p / 10.0;
    assert!((ex["value"].as_f64().unwrap() - want).abs() < 1e-12);
    assert_eq!(ex["method"], "exact");
    let mc = json(&["bbins", "--delta", "1", "--B", "1", "--T", "10", "--method", "mc", "--samples", "20000"], dir.path());
    let sigma = mc["ci"].as_f64().unwrap() / 1.959964;
    assert!((mc["value"].as_f64().unwrap() - want).abs() < 4.0 * sigma);
    let fb = json(&["bbins", "--delta", "3", "--B", "20", "--T", "200", "--max-states", "10"], dir.path());
    assert_eq!(fb["method"], "mc");
    assert_eq!(fb["fallback"], true);
}

#[test]
fn campaign_outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--kind", "toy1", "--out", "toy1.json"], dir.path());
    let manifest = r#"{"schema_version":1,"output_dir":"res","runs":[
        {"name":"toy","instance":"toy1.json","policy":"samp","episodes":800,"seed":1},
        {"name":"crw","generator":{"kind":"cr_worst","params":{"delta":2,"T":20}},"policy":"att","alpha":0.5,"episodes":600,"seed":2,"replicas":1000},
        {"name":"rank","instance":"toy1.json","policy":"ranking","episodes":500,"seed":3}]}"#;
    std::fs::write(dir.path().join("m.json"), manifest).unwrap();
    let read_all = || {
        ["toy.csv", "crw.csv", "rank.csv", "summary.csv"]
            .map(|f| std::fs::read(dir.path().join("res").join(f)).unwrap())
    };
    ok(&["campaign", "m.json"], dir.path());
    let first = read_all();
    ok(&["campaign", "m.json"], dir.path());
    assert_eq!(first, read_all());
    let summary = String::from_utf8(first[3].clone()).unwrap();
    let names: Vec<_> = summary.lines().skip(2).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(names, ["toy", "crw", "rank"]);
    // Each run's own CSV agrees with a plain simulate call.
    let direct = ok(&["simulate", "toy1.json", "--policy", "samp", "--episodes", "800", "--seed", "1"], dir.path());
    assert_eq!(direct.as_bytes(), &first[0][..]);
}

#[test]
fn campaign_rejects_duplicate_names() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = r#"{"schema_version":1,"runs":[
        {"name":"a","generator":{"kind":"toy1"},"policy":"samp","episodes":10,"seed":1},
        {"name":"a","generator":{"kind":"toy1"},"policy":"samp","episodes":10,"seed":1}]}"#;
    std::fs::write(dir.path().join("m.json"), manifest).unwrap();
    let out = mbosm(&["campaign", "m.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(mbosm(&["--help"], dir.path()).status.code(), Some(0));
    assert_eq!(mbosm(&["frobnicate"], dir.path()).status.code(), Some(1));
    assert_eq!(mbosm(&["bounds"], dir.path()).status.code(), Some(1));
    ok(&["gen", "--kind", "toy1", "--out", "toy1.json"], dir.path());
    let bad_alpha = mbosm(&["simulate", "toy1.json", "--policy", "samp", "--alpha", "2"], dir.path());
    assert_eq!(bad_alpha.status.code(), Some(1));
    let threads = Command::new(env!("CARGO_BIN_EXE_mbosm"))
        .args(["bounds", "--delta", "2"])
        .env("MBOSM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(1));
    assert_eq!(mbosm(&["bbins", "--delta", "3", "--B", "5", "--T", "10"], dir.path()).status.code(), Some(1));
    assert_eq!(mbosm(&["lp", "missing.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn four_episode_simulation_repeats_exactly() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["gen", "--kind", "toy1", "--out", "toy1.json"], dir.path());
    let args = ["simulate", "toy1.json", "--policy", "samp", "--alpha", "1", "--episodes", "4", "--seed", "7"];
    assert_eq!(ok(&args, dir.path()), ok(&args, dir.path()));
}
