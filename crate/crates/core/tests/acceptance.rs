//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use mbosm::bounds::{cr_upper, find_eta, g, large_budget_ratio, BoundValue};
use mbosm::engine::{eligibility_profile, estimate_performance, run_episode_with, simulate_episodes, summarize, Arrivals};
use mbosm::instance::{build_projective_plane, generate, GenKind, GenParams, Instance, Topology};
use mbosm::lp::{build_benchmark_lp, solve_lp, LpSolution, DEFAULT_TOL};
use mbosm::oracle::lemmas::{poisson_factor2_check, poisson_monotone_check, binomial_overflow_check, slud_check};
use mbosm::oracle::{bbins_exact, bbins_mc, clairvoyant_opt, exact_policy_value, BbParams, ExactPolicy, OracleCaps};
use mbosm::policies::{AttPolicy, BaselineKind, Policy, SampTable};
use mbosm::rng::{stream, Domain};
use mbosm::stats::{ks_two_sample, Z95};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand_distr::{Distribution, Geometric};
use std::time::Instant;

struct Outcome {
    pass: bool,
    detail: String,
}

fn lp(inst: &Instance) -> LpSolution {
    solve_lp(&build_benchmark_lp(inst).expect("valid instance"), DEFAULT_TOL).expect("solvable")
}

fn samp(inst: &Instance, alpha: f64) -> (Topology, SampTable, f64) {
    let sol = lp(inst);
    let topo = inst.topology().expect("valid instance");
    let table = SampTable::new(&topo, &sol.x_star, alpha).expect("feasible x*");
    (topo, table, sol.objective)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn example_one() -> Outcome {
    let start = Instant::now();
    let inst = generate(GenKind::Toy1, &GenParams::new(), 0).unwrap();
    let caps = OracleCaps::default();
    let greedy = exact_policy_value(&inst, ExactPolicy::Greedy, &caps).unwrap();
    let opt = clairvoyant_opt(&inst, &caps).unwrap();
    let ratio = greedy.ratio(&opt);
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        pass: greedy.exact == Some(rat(12, 9))
            && opt.exact == Some(rat(13, 9))
            && ratio.exact == Some(rat(12, 13))
            && secs < 1.0,
        detail: format!("greedy={greedy} clairvoyant={opt} ratio={ratio} in {secs:.3}s"),
    }
}

fn samp_worst_case() -> Outcome {
    let inst = generate(GenKind::CrWorst, &GenParams::new().with("delta", 2).with("T", 2000), 0).unwrap();
    let (topo, table, obj) = samp(&inst, 1.0);
    let est = estimate_performance(&topo, &Policy::Samp(table), 100_000, 2).unwrap();
    let cr = est.mean_utility / obj;
    let target = (1.0 - (-2.0f64).exp()) / 2.0;
    Outcome {
        pass: (cr - target).abs() <= 0.01,
        detail: format!("empirical cr {cr:.5} (±{:.5}) vs {target:.5} ± 0.01", est.utility_ci / obj),
    }
}

fn attenuation() -> Outcome {
    let inst = generate(GenKind::CrWorst, &GenParams::new().with("delta", 2).with("T", 500), 0).unwrap();
    let (topo, table, _) = samp(&inst, 1.0);
    let att = AttPolicy::new(&topo, table, 100_000, 3).unwrap();
    let rounds = [1, 125, 250, 500];
    let profile = eligibility_profile(&topo, &att, 0, &rounds, 100_000, 3).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for r in &profile {
        // The realized rate is β_t·γ_t/β̂_t, so β̂'s own sampling error adds to
        // the episode noise.
        let beta = att.table.beta(0, r.round);
        let beta_sd = att.table.ci(0, r.round) / Z95;
        let sigma = (r.sigma * r.sigma + (r.gamma * beta_sd / beta).powi(2)).sqrt();
        let z = (r.rate - r.gamma) / sigma.max(f64::MIN_POSITIVE);
        pass &= (r.rate - r.gamma).abs() <= 3.0 * sigma;
        parts.push(format!("t={} rate={:.5} gamma={:.5} z={:+.2}", r.round, r.rate, r.gamma, z));
    }
    let clamp = att.table.clamp_rate();
    pass &= clamp < 0.01;
    Outcome {
        pass,
        detail: format!(
            "{}; clamp rate {:.4} (needs < 0.01), significant inversions {:.4}",
            parts.join(", "),
            clamp,
            att.table.significant_inversion_rate()
        ),
    }
}

fn variance_worst_case() -> Outcome {
    let t = 2000usize;
    let inst = generate(GenKind::VarWorst, &GenParams::new().with("T", t), 0).unwrap();
    let (topo, table, _) = samp(&inst, 1.0);
    let policy = Policy::Samp(table);
    let m = 100_000;
    let runs = simulate_episodes(&topo, &policy, m, 4).unwrap();
    let est = summarize(&policy, &runs);
    let tt = (t * t) as f64;
    let scaled = est.var_matches / tt;
    let target = 1.0 - (-2.0f64).exp() - 2.0 * (-1.0f64).exp();
    let observed: Vec<f64> = runs.iter().map(|r| r.match_count as f64).collect();
    let geo = Geometric::new(1.0 / t as f64).unwrap();
    let mut rng = stream(4, Domain::Diagnostic, 0);
    let reference: Vec<f64> = (0..m).map(|_| ((geo.sample(&mut rng) + 1).min(t as u64)) as f64).collect();
    let ks = ks_two_sample(&observed, &reference);
    Outcome {
        pass: (scaled - target).abs() <= 0.01 && ks.p_value > 0.01,
        detail: format!(
            "var/T^2 {scaled:.5} (±{:.5}) vs {target:.5} ± 0.01; KS D={:.5} p={:.3}",
            est.var_ci / tt,
            ks.statistic,
            ks.p_value
        ),
    }
}

fn hardness() -> Outcome {
    let t = 2100usize;
    let inst = generate(GenKind::Hardness, &GenParams::new().with("delta", 3).with("T", t), 0).unwrap();
    let sol = lp(&inst);
    let topo = inst.topology().unwrap();
    let est = estimate_performance(&topo, &Policy::Baseline(BaselineKind::Greedy), 20_000, 5).unwrap();
    let p = (3.0 - 1.0 + 1.0 / 3.0) / t as f64;
    let single = 1.0 - (1.0 - p).powi(t as i32);
    let sigma = est.utility_ci / Z95;
    let cr = est.mean_utility / sol.objective;
    let lp_ok = sol.objective >= 7.0 / 3.0 - 1e-6;
    let greedy_ok = est.mean_utility <= single + 3.0 * sigma;
    let cr_ok = cr <= cr_upper(3) + 0.01;
    Outcome {
        pass: lp_ok && greedy_ok && cr_ok,
        detail: format!(
            "lp {:.6} (>= 7/3); greedy {:.5} (<= {single:.5} + 3*{sigma:.5}); cr {cr:.5} (<= {:.5})",
            sol.objective,
            est.mean_utility,
            cr_upper(3) + 0.01
        ),
    }
}

fn large_budget_single_bin() -> Outcome {
    let start = Instant::now();
    let est = bbins_exact(BbParams::new(1, 100, 100_000).unwrap(), 10_000_000).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let BoundValue::Point(target) = large_budget_ratio(1, 100).unwrap().value else {
        unreachable!()
    };
    Outcome {
        pass: (est.value - target).abs() <= 0.005 && secs < 60.0,
        detail: format!("exact {:.5} vs {target:.5} ± 0.005 in {secs:.2}s", est.value),
    }
}

fn kappa_bracket() -> Outcome {
    let start = Instant::now();
    let est = bbins_mc(BbParams::new(64, 2048, 1_000_000).unwrap(), 10_000, 7).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let BoundValue::Bracket { lower, upper } = large_budget_ratio(64, 2048).unwrap().value else {
        unreachable!()
    };
    Outcome {
        pass: est.value >= lower - est.ci && est.value <= upper + est.ci,
        detail: format!(
            "mc {:.5} ± {:.5} vs [{lower:.5}, {upper:.5}] in {secs:.1}s",
            est.value, est.ci
        ),
    }
}

fn eta_and_g() -> Outcome {
    let eta = find_eta(1e-6);
    let grid: Vec<f64> = (1..=1000).map(|i| g(i as f64 * 0.01)).collect();
    let peak = grid
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    let unimodal = grid[..=peak].windows(2).all(|w| w[0] < w[1]) && grid[peak..].windows(2).all(|w| w[0] > w[1]);
    let g1 = g(1.0);
    Outcome {
        pass: (eta - 1.126).abs() <= 0.001 && unimodal && (g1 - 0.128_906).abs() <= 1e-6,
        detail: format!(
            "eta {eta:.6}; grid peak at x={:.2}, unimodal={unimodal}; g(1) {g1:.7}",
            (peak + 1) as f64 * 0.01
        ),
    }
}

fn lp_dominance() -> Outcome {
    let caps = OracleCaps::default();
    let params = GenParams::new().with("T", 5).with("max_edges", 4);
    let mut worst = f64::INFINITY;
    let mut checked = 0;
    for seed in 0..50 {
        let inst = generate(GenKind::Random, &params, seed).unwrap();
        assert!(inst.horizon <= 5 && inst.edges.len() <= 4);
        let opt = clairvoyant_opt(&inst, &caps).unwrap();
        worst = worst.min(lp(&inst).objective - opt.value);
        checked += 1;
    }
    Outcome {
        pass: checked == 50 && worst >= -1e-9,
        detail: format!("{checked} instances, min(lp - clairvoyant) = {worst:.3e}"),
    }
}

fn safety_rounds() -> Result<u64, String> {
    let params = GenParams::new()
        .with("T", 40)
        .with("n_online", 4)
        .with("max_edges", 6)
        .with("max_budget", 3);
    let mut rounds = 0u64;
    let mut seed = 0;
    while rounds < 1_000_000 {
        let inst = generate(GenKind::Random, &params, seed).map_err(|e| e.to_string())?;
        let (topo, table, _) = samp(&inst, 1.0);
        let att = AttPolicy::new(&topo, table.clone(), 1000, seed).map_err(|e| e.to_string())?;
        let policies = [
            Policy::Samp(table),
            Policy::Att(att),
            Policy::Baseline(BaselineKind::Greedy),
            Policy::Baseline(BaselineKind::Ranking),
        ];
        for (p, policy) in policies.iter().enumerate() {
            for m in 0..250u64 {
                let mut rng = stream(seed, Domain::Episode, m * 4 + p as u64);
                let mut bad = None;
                let r = run_episode_with(&topo, policy, &mut rng, Arrivals::Sampled, true, |t, rem| {
                    rounds += 1;
                    if rem.iter().zip(&topo.budgets).any(|(r, b)| r > b) {
                        bad = Some(t);
                    }
                })
                .map_err(|e| e.to_string())?;
                if let Some(t) = bad {
                    return Err(format!("ledger out of range at round {t}"));
                }
                let mut spent = vec![0u32; topo.n_resources()];
                for a in &r.accepted {
                    for &k in &topo.outcome_support[a.edge][a.outcome] {
                        spent[k] += 1;
                    }
                }
                for k in 0..spent.len() {
                    if topo.budgets[k] - r.final_ledger[k] != spent[k] {
                        return Err(format!("ledger not conserved on resource {k}"));
                    }
                }
            }
        }
        seed += 1;
    }
    Ok(rounds)
}

fn determinism() -> Result<(), String> {
    let inst = generate(GenKind::Random, &GenParams::new().with("T", 30).with("max_budget", 3), 11).unwrap();
    let run = || -> String {
        let (topo, table, _) = samp(&inst, 0.8);
        let att = AttPolicy::new(&topo, table.clone(), 4096, 9).unwrap();
        let a = estimate_performance(&topo, &Policy::Samp(table), 5000, 1).unwrap();
        let b = estimate_performance(&topo, &Policy::Att(att), 5000, 1).unwrap();
        let c = bbins_mc(BbParams::new(3, 5, 100).unwrap(), 3000, 2).unwrap();
        format!("{a:?}{b:?}{c:?}")
    };
    let pool = |n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
    let one = pool(1).install(run);
    let many = pool(4).install(run);
    if one == many {
        Ok(())
    } else {
        Err("outputs differ between 1 and 4 threads".into())
    }
}

fn projective_planes() -> Result<(), String> {
    for q in [2u64, 3, 5, 7, 11, 13] {
        let h = build_projective_plane(q).map_err(|e| e.to_string())?;
        let n = (q * q + q + 1) as usize;
        let ok = h.n_vertices == n
            && h.hyperedges.len() == n
            && h.hyperedges.iter().all(|l| l.len() == q as usize + 1)
            && h.degrees().iter().all(|&d| d == q as usize + 1)
            && h.pairwise_intersecting();
        if !ok {
            return Err(format!("plane of order {q} malformed"));
        }
    }
    Ok(())
}

fn property_suites() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    match safety_rounds() {
        Ok(r) => parts.push(format!("safety over {r} rounds")),
        Err(e) => {
            pass = false;
            parts.push(format!("safety: {e}"));
        }
    }
    match determinism() {
        Ok(()) => parts.push("determinism 1 vs 4 threads".into()),
        Err(e) => {
            pass = false;
            parts.push(format!("determinism: {e}"));
        }
    }
    let checks = [
        (poisson_monotone_check(200), 0.0),
        (binomial_overflow_check(&[0.25, 0.5, 0.75, 1.0], &[0.05, 0.25, 0.5, 0.75, 1.0], 20, 1000), 1e-12),
        (slud_check(60, 20), 1e-12),
        (poisson_factor2_check(6, 12, 4), 1e-12),
    ];
    for (c, tol) in &checks {
        pass &= c.holds(*tol);
        parts.push(format!("{} ({} cases, max {:.2e})", c.name, c.cases, c.max_violation));
    }
    match projective_planes() {
        Ok(()) => parts.push("projective planes q <= 13".into()),
        Err(e) => {
            pass = false;
            parts.push(e);
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("toy1 exact greedy and clairvoyant", example_one),
        ("SAMP on its worst case", samp_worst_case),
        ("ATT attenuation", attenuation),
        ("variance worst case", variance_worst_case),
        ("hardness instance", hardness),
        ("large budget, one bin", large_budget_single_bin),
        ("kappa bracket", kappa_bracket),
        ("eta and g", eta_and_g),
        ("LP dominates clairvoyant", lp_dominance),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        if !out.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({}) [{:.1}s]",
            n + 1,
            if out.pass { "PASS" } else { "FAIL" },
            name,
            out.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {} failed", criteria.len() - failed, failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
