use mbosm::engine::{estimate_performance, run_episode_with, Arrivals};
use mbosm::instance::{build_projective_plane, generate, load, save, sparsity, GenKind, GenParams, InstanceError};
use mbosm::lp::{build_benchmark_lp, check_feasible, solve_lp, DEFAULT_TOL};
use mbosm::oracle::{bbins_ratio, clairvoyant_opt, exact_policy_value, BbMethod, BbParams, ExactPolicy, OracleCaps};
use mbosm::policies::{AttPolicy, BaselineKind, Policy, SampTable};
use mbosm::rng::{stream, Domain};
use mbosm::stats::Z95;

fn gen(kind: GenKind, p: GenParams) -> mbosm::instance::Instance {
    generate(kind, &p, 0).unwrap()
}

#[test]
fn toy1_lp_by_hand() {
    let inst = gen(GenKind::Toy1, GenParams::new());
    let model = build_benchmark_lp(&inst).unwrap();
    assert_eq!((model.n_rows(), model.n_cols()), (4, 2));
    assert_eq!(model.objective, vec![1.0, 1.0]);
    let sol = solve_lp(&model, DEFAULT_TOL).unwrap();
    assert!((sol.objective - 2.0).abs() < 1e-12);
    assert!((sol.x_star[0] - 2.0 / 3.0).abs() < 1e-12);
    assert!((sol.x_star[1] - 4.0 / 3.0).abs() < 1e-12);
    assert!(check_feasible(&model, &[2.0 / 3.0, 4.0 / 3.0], 1e-9).unwrap());
    assert!(!check_feasible(&model, &[1.0, 2.0], 1e-9).unwrap());
    assert!(check_feasible(&model, &[0.0, 0.0], 0.0).unwrap());
}

#[test]
fn cr_worst_lp_and_oracles() {
    let inst = gen(GenKind::CrWorst, GenParams::new().with("delta", 2).with("T", 6));
    let model = build_benchmark_lp(&inst).unwrap();
    assert_eq!((model.n_rows(), model.n_cols()), (3, 1));
    let sol = solve_lp(&model, DEFAULT_TOL).unwrap();
    assert!((sol.objective - 6.0).abs() < 1e-9);
    let topo = inst.topology().unwrap();
    let samp = SampTable::new(&topo, &sol.x_star, 1.0).unwrap();
    let exact = exact_policy_value(&inst, ExactPolicy::Samp(&samp), &OracleCaps::default()).unwrap();
    // Safe at round t with probability (1 − 2/6)^{t−1}.
    let by_hand: f64 = (0..6).map(|t| (2.0f64 / 3.0).powi(t)).sum();
    assert!((exact.value - by_hand).abs() < 1e-12);
    let est = estimate_performance(&topo, &Policy::Samp(samp), 40_000, 8).unwrap();
    assert!((est.mean_utility - by_hand).abs() < 4.0 * est.utility_ci / Z95 + 1e-12);
}

#[test]
fn hardness_fano_instance() {
    let inst = gen(GenKind::Hardness, GenParams::new().with("delta", 3).with("T", 21));
    assert_eq!(inst.resources, 7);
    assert_eq!(inst.edges.len(), 21);
    assert_eq!(sparsity(&inst), 3);
    for e in &inst.edges {
        assert!((e.outcomes[0].prob.value() - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(e.support().len(), 3);
    }
    let sol = solve_lp(&build_benchmark_lp(&inst).unwrap(), DEFAULT_TOL).unwrap();
    assert!(sol.objective >= 7.0 / 3.0 - 1e-9);
    assert!(matches!(
        generate(GenKind::Hardness, &GenParams::new().with("delta", 5).with("T", 21), 0),
        Err(InstanceError::NonPrimeOrder(4))
    ));
    assert!(matches!(
        generate(GenKind::Hardness, &GenParams::new().with("delta", 3).with("T", 20), 0),
        Err(InstanceError::IndivisibleHorizon { .. })
    ));
    assert!(matches!(build_projective_plane(4), Err(InstanceError::NonPrimeOrder(4))));
}

#[test]
fn sparsity_examples() {
    assert_eq!(sparsity(&gen(GenKind::Toy1, GenParams::new())), 2);
    assert_eq!(sparsity(&gen(GenKind::VarWorst, GenParams::new().with("T", 100))), 1);
    let mut empty = gen(GenKind::Toy1, GenParams::new());
    empty.edges.clear();
    assert_eq!(sparsity(&empty), 0);
    let sol = solve_lp(&build_benchmark_lp(&empty).unwrap(), DEFAULT_TOL).unwrap();
    assert_eq!(sol.objective, 0.0);
}

#[test]
fn file_round_trip_keeps_exact_oracle_values() {
    let dir = std::env::temp_dir().join(format!("mbosm-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("toy1.json");
    save(&gen(GenKind::Toy1, GenParams::new()), &path).unwrap();
    let inst = load(&path).unwrap();
    assert!(inst.is_exact());
    let caps = OracleCaps::default();
    let opt = clairvoyant_opt(&inst, &caps).unwrap();
    let greedy = exact_policy_value(&inst, ExactPolicy::Greedy, &caps).unwrap();
    assert_eq!(greedy.ratio(&opt).to_string(), "12/13");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn greedy_simulation_matches_exact_value() {
    let inst = gen(GenKind::Toy1, GenParams::new());
    let topo = inst.topology().unwrap();
    let est = estimate_performance(&topo, &Policy::Baseline(BaselineKind::Greedy), 100_000, 3).unwrap();
    assert!((est.mean_utility - 4.0 / 3.0).abs() < 4.0 * est.utility_ci / Z95);
}

#[test]
fn greedy_stops_after_any_toy1_match() {
    // After a is matched at round 1 one resource is gone and both edges
    // touch it, so round 2 rejects whatever arrives.
    let inst = gen(GenKind::Toy1, GenParams::new());
    let topo = inst.topology().unwrap();
    let policy = Policy::Baseline(BaselineKind::Greedy);
    for m in 0..200 {
        let mut rng = stream(0, Domain::Episode, m);
        let r = run_episode_with(&topo, &policy, &mut rng, Arrivals::Scripted(&[0, 1]), true, |_, _| {}).unwrap();
        assert_eq!(r.accepted[0].round, 1);
        assert!(r.accepted.iter().all(|a| a.round == 1));
    }
}

#[test]
fn star_zero_baselines_vanish() {
    // Greedy grabs the first arrival; the heavy agent is rarely first.
    let inst = gen(GenKind::StarZero, GenParams::new().with("n", 6).with("eps", 0));
    let caps = OracleCaps::default();
    let greedy = exact_policy_value(&inst, ExactPolicy::Greedy, &caps).unwrap();
    let ranking = exact_policy_value(&inst, ExactPolicy::Ranking, &caps).unwrap();
    let opt = clairvoyant_opt(&inst, &caps).unwrap();
    assert!((greedy.value - 1.0 / 6.0).abs() < 1e-12);
    assert_eq!(greedy, ranking);
    assert!((opt.value - (1.0 - (5.0f64 / 6.0).powi(6))).abs() < 1e-12);
}

#[test]
fn att_matches_gamma_on_cr_worst() {
    let t = 200;
    let inst = gen(GenKind::CrWorst, GenParams::new().with("delta", 2).with("T", t));
    let topo = inst.topology().unwrap();
    let x = solve_lp(&build_benchmark_lp(&inst).unwrap(), DEFAULT_TOL).unwrap().x_star;
    let att = AttPolicy::new(&topo, SampTable::new(&topo, &x, 1.0).unwrap(), 100_000, 1).unwrap();
    for round in [50, 100, 200] {
        let exact = (1.0 - 2.0 / t as f64).powi(round as i32 - 1);
        assert!((att.table.beta(0, round) - exact).abs() <= 3.0 * att.table.ci(0, round), "round {round}");
    }
}

#[test]
fn bbins_exact_and_mc_agree_across_triples() {
    let mut n = 0;
    for delta in 1..=4usize {
        for b in 1..=5u32 {
            let t = (delta as u64 * b as u64) * 3 + 7;
            let p = BbParams::new(delta, b, t).unwrap();
            let ex = bbins_ratio(p, BbMethod::Exact, 1_000_000).unwrap();
            let mc = bbins_ratio(p, BbMethod::Mc { samples: 20_000, seed: n }, 0).unwrap();
            let sigma = mc.ci / Z95;
            assert!((ex.value - mc.value).abs() <= 4.0 * sigma, "{p:?}: {} vs {}", ex.value, mc.value);
            n += 1;
        }
    }
    assert_eq!(n, 20);
}
