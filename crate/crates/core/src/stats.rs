//! Aggregation helpers shared by the engine, the oracles and the tests.

use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanCi {
    pub mean: f64,
    /// 95% normal half-width of the mean.
    pub ci: f64,
    pub variance: f64,
}

/// Mean, sample variance and CI with compensated sums (two passes).
pub fn mean_ci(values: &[f64]) -> MeanCi {
    let n = values.len();
    if n == 0 {
        return MeanCi {
            mean: f64::NAN,
            ci: f64::NAN,
            variance: f64::NAN,
        };
    }
    let mean = values.iter().copied().collect::<CompensatedSum>().value() / n as f64;
    let variance = if n > 1 {
        values
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .collect::<CompensatedSum>()
            .value()
            / (n - 1) as f64
    } else {
        0.0
    };
    MeanCi {
        mean,
        ci: Z95 * (variance / n as f64).sqrt(),
        variance,
    }
}

/// Summary of an integer sample with a jackknife CI on the sample variance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountStats {
    pub n: usize,
    pub mean: f64,
    pub mean_ci: f64,
    pub variance: f64,
    pub variance_ci: f64,
}

/// Moments use exact integer sums, so the result does not depend on the
/// order of `values`.
pub fn count_stats(values: &[u64]) -> CountStats {
    let n = values.len();
    let s1: u128 = values.iter().map(|&v| v as u128).sum();
    let s2: u128 = values.iter().map(|&v| (v as u128) * (v as u128)).sum();
    let nf = n as f64;
    let mean = s1 as f64 / nf;
    // n·SS = n·Σx² − (Σx)², exact in integers.
    let nss = (n as u128) * s2 - s1 * s1;
    let ss = nss as f64 / nf;
    let variance = if n > 1 { ss / (nf - 1.0) } else { 0.0 };
    let variance_ci = if n > 2 {
        // Leave-one-out variances in closed form: SS₋ᵢ = SS − (xᵢ−m)²·n/(n−1).
        let loo = |x: u64| {
            let d = x as f64 - mean;
            (ss - d * d * nf / (nf - 1.0)) / (nf - 2.0)
        };
        let mut distinct: Vec<u64> = values.to_vec();
        distinct.sort_unstable();
        let mut groups: Vec<(u64, usize)> = Vec::new();
        for v in distinct {
            match groups.last_mut() {
                Some((x, c)) if *x == v => *c += 1,
                _ => groups.push((v, 1)),
            }
        }
        let bar = groups
            .iter()
            .map(|&(x, c)| c as f64 * loo(x))
            .collect::<CompensatedSum>()
            .value()
            / nf;
        let spread = groups
            .iter()
            .map(|&(x, c)| {
                let d = loo(x) - bar;
                c as f64 * d * d
            })
            .collect::<CompensatedSum>()
            .value();
        Z95 * ((nf - 1.0) / nf * spread).sqrt()
    } else {
        f64::NAN
    };
    CountStats {
        n,
        mean,
        mean_ci: Z95 * (variance / nf).sqrt(),
        variance,
        variance_ci,
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = sign * (-2.0 * kf * kf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value
/// (Stephens' small-sample correction). Conservative for discrete data.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> KsResult {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        let x = a[i].min(b[j]);
        while i < na && a[i] <= x {
            i += 1;
        }
        while j < nb && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na as f64 - j as f64 / nb as f64).abs());
    }
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let sq = ne.sqrt();
    KsResult {
        statistic: d,
        p_value: kolmogorov_q((sq + 0.12 + 0.11 / sq) * d),
    }
}
