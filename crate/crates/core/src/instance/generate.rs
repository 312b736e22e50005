use super::{
    build_projective_plane, validate_instance, EdgeSpec, Instance, InstanceError, Num,
    OnlineAgent, OutcomeEntry,
};
use crate::rng::{self, Domain};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GenKind {
    Toy1,
    StarZero,
    CrWorst,
    VarWorst,
    Hardness,
    LargeBudget,
    Random,
}

impl GenKind {
    pub const ALL: [GenKind; 7] = [
        GenKind::Toy1,
        GenKind::StarZero,
        GenKind::CrWorst,
        GenKind::VarWorst,
        GenKind::Hardness,
        GenKind::LargeBudget,
        GenKind::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GenKind::Toy1 => "toy1",
            GenKind::StarZero => "star_zero",
            GenKind::CrWorst => "cr_worst",
            GenKind::VarWorst => "var_worst",
            GenKind::Hardness => "hardness",
            GenKind::LargeBudget => "large_budget",
            GenKind::Random => "random",
        }
    }

    fn keys(self) -> &'static [&'static str] {
        match self {
            GenKind::Toy1 => &[],
            GenKind::StarZero => &["n", "eps"],
            GenKind::CrWorst => &["delta", "T"],
            GenKind::VarWorst => &["T", "w"],
            GenKind::Hardness => &["delta", "T"],
            GenKind::LargeBudget => &["delta", "B", "T"],
            GenKind::Random => &[
                "n_offline",
                "n_online",
                "K",
                "delta",
                "T",
                "max_edges",
                "max_outcomes",
                "max_budget",
                "conc",
            ],
        }
    }
}

impl fmt::Display for GenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GenKind {
    type Err = InstanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GenKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| InstanceError::BadParams(format!("unknown generator kind {:?}", s)))
    }
}

/// Generator parameters as textual key/value pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GenParams {
    values: BTreeMap<String, String>,
}

impl GenParams {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.values.insert(key.to_string(), value.to_string());
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    /// Parse `key=value`.
    pub fn insert_pair(&mut self, pair: &str) -> Result<(), InstanceError> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| InstanceError::BadParams(format!("expected key=value, got {:?}", pair)))?;
        self.set(k.trim(), v.trim());
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, InstanceError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| {
                InstanceError::BadParams(format!("cannot parse parameter {}={:?}", key, v))
            }),
        }
    }

    fn or<T: FromStr>(&self, key: &str, default: T) -> Result<T, InstanceError> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    fn need<T: FromStr>(&self, kind: GenKind, key: &str) -> Result<T, InstanceError> {
        self.get(key)?
            .ok_or_else(|| InstanceError::BadParams(format!("{} requires parameter {}", kind, key)))
    }
}

fn bad(msg: String) -> InstanceError {
    InstanceError::BadParams(msg)
}

fn positive(key: &str, v: usize) -> Result<usize, InstanceError> {
    if v == 0 {
        Err(bad(format!("{} must be positive", key)))
    } else {
        Ok(v)
    }
}

fn frac(num: usize, den: usize) -> Num {
    Num::ratio(num as i64, den as i64)
}

fn single_agent(name: String, horizon: usize, budgets: Vec<u32>, outcomes: Vec<OutcomeEntry>) -> Instance {
    Instance {
        name,
        horizon,
        resources: budgets.len(),
        budgets,
        online: vec![OnlineAgent {
            id: "j".into(),
            p: Num::int(1),
        }],
        offline: vec!["i".into()],
        edges: vec![EdgeSpec {
            offline_id: "i".into(),
            online_id: "j".into(),
            outcomes,
        }],
    }
}

/// Build a named or random instance. Pure in `(kind, params, seed)`; only the
/// random kind reads `seed`.
pub fn generate(kind: GenKind, params: &GenParams, seed: u64) -> Result<Instance, InstanceError> {
    if let Some((k, _)) = params.iter().find(|(k, _)| !kind.keys().contains(k)) {
        return Err(bad(format!("{} does not take parameter {}", kind, k)));
    }
    let inst = match kind {
        GenKind::Toy1 => toy1(),
        GenKind::StarZero => star_zero(params)?,
        GenKind::CrWorst => cr_worst(params)?,
        GenKind::VarWorst => var_worst(params)?,
        GenKind::Hardness => hardness(params)?,
        GenKind::LargeBudget => large_budget(params)?,
        GenKind::Random => random(params, seed)?,
    };
    let report = validate_instance(&inst);
    if !report.is_empty() {
        return Err(InstanceError::Invalid(report));
    }
    Ok(inst)
}

fn toy1() -> Instance {
    let half = Num::ratio(1, 2);
    Instance {
        name: "toy1".into(),
        horizon: 2,
        resources: 2,
        budgets: vec![1, 1],
        online: vec![
            OnlineAgent {
                id: "a".into(),
                p: Num::ratio(1, 3),
            },
            OnlineAgent {
                id: "b".into(),
                p: Num::ratio(2, 3),
            },
        ],
        offline: vec!["1".into()],
        edges: vec![
            EdgeSpec {
                offline_id: "1".into(),
                online_id: "a".into(),
                outcomes: vec![
                    OutcomeEntry::new(half, vec![0], Num::int(1)),
                    OutcomeEntry::new(half, vec![1], Num::int(1)),
                ],
            },
            EdgeSpec {
                offline_id: "1".into(),
                online_id: "b".into(),
                outcomes: vec![
                    OutcomeEntry::new(half, vec![0, 1], Num::int(2)),
                    OutcomeEntry::new(half, vec![], Num::int(0)),
                ],
            },
        ],
    }
}

/// One offline vertex, `n` equally likely agents over `T = n` rounds, a unit
/// budget; `j_1` is worth 1 and every other agent `eps`.
fn star_zero(params: &GenParams) -> Result<Instance, InstanceError> {
    let n = positive("n", params.need(GenKind::StarZero, "n")?)?;
    let eps: f64 = params.need(GenKind::StarZero, "eps")?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(bad(format!("eps must be a non-negative number, got {}", eps)));
    }
    let eps = Num::from_decimal(eps);
    let online: Vec<OnlineAgent> = (1..=n)
        .map(|l| OnlineAgent {
            id: format!("j{}", l),
            p: frac(1, n),
        })
        .collect();
    let edges = online
        .iter()
        .enumerate()
        .map(|(l, a)| EdgeSpec {
            offline_id: "i".into(),
            online_id: a.id.clone(),
            outcomes: vec![OutcomeEntry::new(
                Num::int(1),
                vec![0],
                if l == 0 { Num::int(1) } else { eps },
            )],
        })
        .collect();
    Ok(Instance {
        name: format!("star_zero_n{}_eps{}", n, eps.value()),
        horizon: n,
        resources: 1,
        budgets: vec![1],
        online,
        offline: vec!["i".into()],
        edges,
    })
}

/// Single edge, `K = delta` unit budgets, cost `1_k` w.p. `1/T` each.
fn cr_worst(params: &GenParams) -> Result<Instance, InstanceError> {
    let delta = positive("delta", params.need(GenKind::CrWorst, "delta")?)?;
    let t = positive("T", params.need(GenKind::CrWorst, "T")?)?;
    if t < delta {
        return Err(bad(format!("cr_worst needs T >= delta, got T={} delta={}", t, delta)));
    }
    let mut outcomes: Vec<OutcomeEntry> = (0..delta)
        .map(|k| OutcomeEntry::new(frac(1, t), vec![k], Num::int(1)))
        .collect();
    outcomes.push(OutcomeEntry::new(frac(t - delta, t), vec![], Num::int(1)));
    Ok(single_agent(
        format!("cr_worst_d{}_T{}", delta, t),
        t,
        vec![1; delta],
        outcomes,
    ))
}

/// Single edge, one unit budget, Bernoulli(1/T) cost; utility `w` on the
/// costly outcome.
fn var_worst(params: &GenParams) -> Result<Instance, InstanceError> {
    let t = positive("T", params.need(GenKind::VarWorst, "T")?)?;
    let w = match params.get::<f64>("w")? {
        None => Num::int(1),
        Some(w) if w >= 0.0 && w.is_finite() => Num::from_decimal(w),
        Some(w) => return Err(bad(format!("w must be non-negative, got {}", w))),
    };
    Ok(single_agent(
        format!("var_worst_T{}", t),
        t,
        vec![1],
        vec![
            OutcomeEntry::new(frac(1, t), vec![0], w),
            OutcomeEntry::new(frac(t - 1, t), vec![], Num::int(0)),
        ],
    ))
}

/// Star over the lines of PG(2, delta-1): `T / (delta²-delta+1)` edge copies
/// per line, each consuming the whole line w.p. `(delta-1+1/delta)/T`.
fn hardness(params: &GenParams) -> Result<Instance, InstanceError> {
    let delta: usize = positive("delta", params.need(GenKind::Hardness, "delta")?)?;
    let t = positive("T", params.need(GenKind::Hardness, "T")?)?;
    if delta < 2 {
        return Err(InstanceError::NonPrimeOrder(delta as u64 - 1));
    }
    let plane = build_projective_plane(delta as u64 - 1)?;
    let lines = plane.hyperedges.len();
    if t % lines != 0 {
        return Err(InstanceError::IndivisibleHorizon { horizon: t, lines });
    }
    // (delta - 1 + 1/delta) / T = lines / (delta T)
    let p = frac(lines, delta * t);
    let q = frac(delta * t - lines, delta * t);
    let online: Vec<OnlineAgent> = (0..t)
        .map(|n| OnlineAgent {
            id: format!("j{}", n),
            p: frac(1, t),
        })
        .collect();
    let edges = online
        .iter()
        .enumerate()
        .map(|(n, a)| EdgeSpec {
            offline_id: "i".into(),
            online_id: a.id.clone(),
            outcomes: vec![
                OutcomeEntry::new(p, plane.hyperedges[n % lines].clone(), Num::int(1)),
                OutcomeEntry::new(q, vec![], Num::int(0)),
            ],
        })
        .collect();
    Ok(Instance {
        name: format!("hardness_d{}_T{}", delta, t),
        horizon: t,
        resources: plane.n_vertices,
        budgets: vec![1; plane.n_vertices],
        online,
        offline: vec!["i".into()],
        edges,
    })
}

/// Single edge, `K = delta` budgets of `B`, cost `1_k` w.p. `B/T` each.
fn large_budget(params: &GenParams) -> Result<Instance, InstanceError> {
    let delta = positive("delta", params.need(GenKind::LargeBudget, "delta")?)?;
    let b = positive("B", params.need(GenKind::LargeBudget, "B")?)?;
    let t = positive("T", params.need(GenKind::LargeBudget, "T")?)?;
    if delta * b > t {
        return Err(bad(format!("large_budget needs delta*B <= T, got {}*{} > {}", delta, b, t)));
    }
    let mut outcomes: Vec<OutcomeEntry> = (0..delta)
        .map(|k| OutcomeEntry::new(frac(b, t), vec![k], Num::int(1)))
        .collect();
    outcomes.push(OutcomeEntry::new(frac(t - delta * b, t), vec![], Num::int(1)));
    Ok(single_agent(
        format!("large_budget_d{}_B{}_T{}", delta, b, t),
        t,
        vec![b as u32; delta],
        outcomes,
    ))
}

fn dirichlet<R: Rng>(rng: &mut R, n: usize, conc: f64) -> Result<Vec<f64>, InstanceError> {
    let gamma = Gamma::new(conc, 1.0).map_err(|e| bad(format!("conc: {}", e)))?;
    loop {
        let g: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let s: f64 = g.iter().sum();
        if s > 0.0 {
            let mut p: Vec<f64> = g.iter().map(|x| x / s).collect();
            // Put the rounding residue on the largest entry so the sum is 1.
            let resid = 1.0 - p.iter().sum::<f64>();
            let top = (0..n).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap_or(0);
            p[top] += resid;
            return Ok(p);
        }
    }
}

/// Small random instance for fuzzing LP and oracles.
fn random(params: &GenParams, seed: u64) -> Result<Instance, InstanceError> {
    let n_off = positive("n_offline", params.or("n_offline", 3)?)?;
    let n_on = positive("n_online", params.or("n_online", 3)?)?;
    let k = positive("K", params.or("K", 3)?)?;
    let delta = positive("delta", params.or("delta", 2)?)?.min(k);
    let t = positive("T", params.or("T", 4)?)?;
    let max_edges = positive("max_edges", params.or("max_edges", 4)?)?;
    let max_outcomes = positive("max_outcomes", params.or("max_outcomes", 3)?)?;
    let max_budget = positive("max_budget", params.or::<usize>("max_budget", 2)?)? as u32;
    let conc: f64 = params.or("conc", 1.0)?;

    let mut rng = rng::stream(seed, Domain::Generator, 0);
    let n_off = rng.random_range(1..=n_off);
    let n_on = rng.random_range(1..=n_on);
    let n_edges = rng.random_range(1..=max_edges.min(n_off * n_on));

    let p = dirichlet(&mut rng, n_on, conc)?;
    let online: Vec<OnlineAgent> = p
        .iter()
        .enumerate()
        .map(|(j, &p)| OnlineAgent {
            id: format!("j{}", j),
            p: Num::float(p),
        })
        .collect();
    let offline: Vec<String> = (0..n_off).map(|i| format!("i{}", i)).collect();
    let budgets = (0..k).map(|_| rng.random_range(1..=max_budget)).collect();

    let mut pairs: Vec<usize> = sample(&mut rng, n_off * n_on, n_edges).into_vec();
    pairs.sort_unstable();
    let mut edges = Vec::with_capacity(n_edges);
    for pair in pairs {
        let size = rng.random_range(1..=delta);
        let support: Vec<usize> = sample(&mut rng, k, size).into_vec();
        let m = rng.random_range(1..=max_outcomes);
        let probs = dirichlet(&mut rng, m, conc)?;
        let outcomes = probs
            .into_iter()
            .map(|prob| {
                let cost: Vec<usize> = support.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
                let utility = (rng.random::<f64>() * 1000.0).round() / 1000.0;
                OutcomeEntry::new(Num::float(prob), cost, Num::from_decimal(utility))
            })
            .collect();
        edges.push(EdgeSpec {
            offline_id: offline[pair / n_on].clone(),
            online_id: online[pair % n_on].id.clone(),
            outcomes,
        });
    }
    Ok(Instance {
        name: format!("random_s{}", seed),
        horizon: t,
        resources: k,
        budgets,
        online,
        offline,
        edges,
    })
}
