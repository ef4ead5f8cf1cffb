//! Enumeration oracle for the CLT variance formulas.
//!
//! The per-step variance of an empirical mean is
//! `v = cov[Z_0, Z_0] + 2 sum_{n >= 1} cov[Z_0, Z_n]`. For both built-in
//! estimators every covariance in the series is computable exactly from
//! the block law for small lags, and bounded by the exponential decay of
//! the autocovariance beyond them, so the closed-form `v_s` and `v_tau`
//! can be pinned against a route that never touches their derivation.

mod common;

use common::pattern_from_mask;
use renseq::dist::WaitingTimeDistribution;
use renseq::estimators::estimate_autocovariance;
use renseq::likelihood::joint_probability;
use renseq::renewal::solve_renewal;
use renseq::sampler::Sampler;

fn fast_mixing_model() -> WaitingTimeDistribution {
    WaitingTimeDistribution::markov_family(&[0.1, 0.45], 0.5).unwrap()
}

/// cov[Z_0, Z_n] for the lag estimator Z_n = X_{n+1} X_{n+tau+1} - 1/mu^2.
fn enumerated_lag_cov(w: &WaitingTimeDistribution, tau: usize, n: usize) -> f64 {
    let len = n + tau + 1;
    let need = 1u64 | (1 << tau) | (1 << n) | (1 << (n + tau));
    let mut joint = 0.0;
    for mask in 0u64..(1 << len) {
        if mask & need == need {
            joint += joint_probability(w, &pattern_from_mask(mask, len)).unwrap();
        }
    }
    let cov = solve_renewal(w, tau);
    let ez = cov.pair_probability(tau);
    joint - ez * ez
}

/// cov[Z_0, Z_n] for the gap estimator
/// Z_n = mu X_{n+1} (1 - X_{n+2}) .. (1 - X_{n+s}) X_{n+s+1}.
fn enumerated_gap_cov(w: &WaitingTimeDistribution, s: usize, n: usize) -> f64 {
    let mu = w.mean();
    let len = n + s + 1;
    let mut joint = 0.0;
    for mask in 0u64..(1 << len) {
        let pat = pattern_from_mask(mask, len);
        let hit = |start: usize| {
            pat[start] == 1 && pat[start + s] == 1 && (1..s).all(|k| pat[start + k] == 0)
        };
        if hit(0) && hit(n) {
            joint += mu * mu * joint_probability(w, &pat).unwrap();
        }
    }
    let p = w.density(s);
    joint - p * p
}

/// Sum the covariance series: exact terms to `n = exact_to`, then the
/// closed tail `2 mu^2 a^2 rho_{n - offset}` which is valid once the two
/// windows are disjoint.
fn series_total(
    exact: impl Fn(usize) -> f64,
    exact_to: usize,
    tail_scale: f64,
    offset: usize,
    rho: &renseq::renewal::CovarianceSequence,
) -> f64 {
    let mut v = exact(0);
    for n in 1..=exact_to {
        v += 2.0 * exact(n);
    }
    for n in exact_to + 1..=120 {
        v += 2.0 * tail_scale * rho.autocovariance(n - offset);
    }
    v
}

#[test]
fn lag_variance_matches_covariance_series() {
    let w = fast_mixing_model();
    let cov = solve_renewal(&w, 256);
    let mu = w.mean();
    let sampler = Sampler::new(&w);
    let seq = sampler.generate(64, 1);
    for tau in 1..=3usize {
        let ct = cov.pair_probability(tau);
        let oracle = series_total(
            |n| enumerated_lag_cov(&w, tau, n),
            11,
            mu * mu * ct * ct,
            tau,
            &cov,
        );
        let v = estimate_autocovariance(&seq, &w, &cov, tau)
            .unwrap()
            .report
            .variance;
        assert!(
            (v - oracle).abs() < 1e-10,
            "tau = {tau}: formula {v} vs series {oracle}"
        );
    }
}

#[test]
fn gap_variance_matches_covariance_series() {
    let w = fast_mixing_model();
    let cov = solve_renewal(&w, 256);
    let mu = w.mean();
    let sampler = Sampler::new(&w);
    let seq = sampler.generate(64, 1);
    for s in 1..=3usize {
        let p = w.density(s);
        let oracle = series_total(
            |n| enumerated_gap_cov(&w, s, n),
            11,
            mu * mu * p * p,
            s,
            &cov,
        );
        let v = renseq::estimators::estimate_waiting_time(&seq, &w, s)
            .unwrap()
            .variance;
        assert!(
            (v - oracle).abs() < 1e-10,
            "s = {s}: formula {v} vs series {oracle}"
        );
    }
}

#[test]
fn fair_coin_closed_forms() {
    // Z_n = X_{n+1} X_{n+2} - 1/4: var 3/16, one covariance 1/16, so
    // v_1 = 5/16; the gap estimator at s = 1 gives 5/4.
    let w = WaitingTimeDistribution::geometric(2.0).unwrap();
    let cov = solve_renewal(&w, 64);
    let sampler = Sampler::new(&w);
    let seq = sampler.generate(64, 1);
    let est = estimate_autocovariance(&seq, &w, &cov, 1).unwrap();
    assert!((est.report.variance - 5.0 / 16.0).abs() < 1e-13);
    assert!((est.limit_variance - 5.0 / 16.0).abs() < 1e-13);
    let gap = renseq::estimators::estimate_waiting_time(&seq, &w, 1).unwrap();
    assert!((gap.variance - 1.25).abs() < 1e-13);
}

#[test]
fn monte_carlo_confirms_lag_variance() {
    // t * var(rho-hat) across replicas approaches v_tau; 4000 replicas put
    // the standard error of the sample variance near 2.2%.
    let w = fast_mixing_model();
    let cov = solve_renewal(&w, 256);
    let sampler = Sampler::new(&w);
    let t = 4_000usize;
    let tau = 2usize;
    let mut scaled = Vec::with_capacity(4_000);
    for k in 0..4_000u64 {
        let seq = sampler.generate(t, renseq::rng::stream_seed(0x0C1F, k));
        let est = estimate_autocovariance(&seq, &w, &cov, tau).unwrap();
        scaled.push((t as f64).sqrt() * (est.report.estimate - est.report.true_value));
    }
    let m = scaled.iter().sum::<f64>() / scaled.len() as f64;
    let var =
        scaled.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (scaled.len() - 1) as f64;
    let seq = sampler.generate(64, 1);
    let v = estimate_autocovariance(&seq, &w, &cov, tau)
        .unwrap()
        .report
        .variance;
    assert!(
        (var - v).abs() < 0.12 * v,
        "monte carlo {var} vs formula {v}"
    );
}
