//! Goodness-of-fit checks for the samplers against their exact laws.

use barrier_mc::oracles::{bridge_marginal, normal_cdf, BridgeEndpoints};
use barrier_mc::rng::{lanes, RngStream};
use barrier_mc::sampling::{sample_bm, sample_bridge, sample_ppp, PppConfig};

const SEED: u64 = 7_001;

/// Kolmogorov–Smirnov distance between a sample and a continuous cdf.
fn ks_distance(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

/// 1% critical value of the one-sample KS statistic.
fn ks_critical(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

#[test]
fn bridge_marginal_is_gaussian() {
    let n = 20_000;
    let ends = BridgeEndpoints::new(-1.0, 2.0, 5.0).unwrap();
    let (mean, var) = bridge_marginal(&ends, 1.5).unwrap();
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            let mut rng = RngStream::new(SEED, i).lane(lanes::PATH).generator();
            sample_bridge(-1.0, 2.0, 5.0, &[0.4, 1.5, 3.0], &mut rng)
                .unwrap()
                .values[1]
        })
        .collect();
    let d = ks_distance(xs, |x| normal_cdf((x - mean) / var.sqrt()));
    assert!(d < ks_critical(n as usize), "KS distance {d}");
}

#[test]
fn bridge_increments_have_bridge_covariance() {
    // Cov(W_r, W_u) = r (t − u) / t for r ≤ u
    let n = 100_000u64;
    let (t, r, u) = (4.0, 1.0, 3.0);
    let mut sum = (0.0, 0.0, 0.0);
    for i in 0..n {
        let mut rng = RngStream::new(SEED + 1, i).lane(lanes::PATH).generator();
        let v = sample_bridge(0.0, 0.0, t, &[r, u], &mut rng).unwrap().values;
        sum.0 += v[0];
        sum.1 += v[1];
        sum.2 += v[0] * v[1];
    }
    let nf = n as f64;
    let cov = sum.2 / nf - (sum.0 / nf) * (sum.1 / nf);
    let exact = r * (t - u) / t;
    // Var(W_r W_u) ≤ 1 here, so 0.015 is above 4 standard errors
    assert!((cov - exact).abs() < 0.015, "cov {cov} vs {exact}");
}

#[test]
fn brownian_motion_marginal_is_gaussian() {
    let n = 20_000;
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            let mut rng = RngStream::new(SEED + 2, i).lane(lanes::PATH).generator();
            sample_bm(0.5, &[1.0, 2.5], &mut rng).unwrap().values[1]
        })
        .collect();
    let d = ks_distance(xs, |x| normal_cdf((x - 0.5) / 2.5f64.sqrt()));
    assert!(d < ks_critical(n as usize), "KS distance {d}");
}

#[test]
fn first_arrival_is_exponential() {
    let n = 20_000;
    let cfg = PppConfig::new(1.5).unwrap();
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            let mut rng = RngStream::new(SEED + 3, i).lane(lanes::ARRIVALS).generator();
            let arr = sample_ppp(&cfg, 1e3, &mut rng).unwrap();
            arr.times()[0]
        })
        .collect();
    let d = ks_distance(xs, |x| 1.0 - (-1.5 * x).exp());
    assert!(d < ks_critical(n as usize), "KS distance {d}");
}

#[test]
fn arrival_counts_are_poisson() {
    let n = 50_000u64;
    let mean: f64 = 6.0;
    let cfg = PppConfig::new(2.0).unwrap();
    let bins = 15;
    let mut observed = vec![0u64; bins + 1];
    for i in 0..n {
        let mut rng = RngStream::new(SEED + 4, i).lane(lanes::ARRIVALS).generator();
        let k = sample_ppp(&cfg, 3.0, &mut rng).unwrap().len();
        observed[k.min(bins)] += 1;
    }
    let mut pmf = Vec::with_capacity(bins + 1);
    let mut p = (-mean).exp();
    for k in 0..bins {
        pmf.push(p);
        p *= mean / (k + 1) as f64;
    }
    pmf.push(1.0 - pmf.iter().sum::<f64>());
    let chi2: f64 = observed
        .iter()
        .zip(&pmf)
        .map(|(&o, &p)| {
            let e = p * n as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum();
    // 99.9% quantile of chi-square with 15 degrees of freedom
    assert!(chi2 < 37.7, "chi-square {chi2}");
}

#[test]
fn arrivals_are_uniform_given_their_count() {
    let n = 5_000;
    let cfg = PppConfig::new(3.0).unwrap();
    let mut xs = Vec::new();
    for i in 0..n {
        let mut rng = RngStream::new(SEED + 5, i).lane(lanes::ARRIVALS).generator();
        xs.extend(sample_ppp(&cfg, 2.0, &mut rng).unwrap().times().iter().copied());
    }
    let m = xs.len();
    let d = ks_distance(xs, |x| (x / 2.0).clamp(0.0, 1.0));
    assert!(d < ks_critical(m), "KS distance {d} over {m} arrivals");
}
