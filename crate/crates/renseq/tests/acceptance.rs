//! Acceptance suite: one test per criterion, each printing a PASS line
//! with its runtime. Run with `--nocapture` to see the lines:
//!
//! ```text
//! cargo test -p renseq --test acceptance -- --nocapture
//! ```

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{figure_specs, model_zoo, pattern_from_mask};
use renseq::dist::WaitingTimeDistribution;
use renseq::estimators::{
    alpha_mixing_bound, estimate_autocovariance, estimate_waiting_time, second_moment_identity,
    standardized_deviations,
};
use renseq::inverse::{covariance_from_spec, invert_autocovariance, CovarianceSpec};
use renseq::likelihood::{entropy_summary, joint_probability, log_likelihood, next_symbol_probability};
use renseq::renewal::{solve_renewal, tail_proxy};
use renseq::rng::stream_seed;
use renseq::sampler::Sampler;

struct FigureModel {
    spec: CovarianceSpec,
    distribution: WaitingTimeDistribution,
}

/// The four figure prescriptions inverted at the default desk horizon
/// (2e4 for the slow decays; the exponential case dies by t ~ 100).
fn figure_models() -> &'static Vec<(&'static str, FigureModel)> {
    static MODELS: OnceLock<Vec<(&'static str, FigureModel)>> = OnceLock::new();
    MODELS.get_or_init(|| {
        figure_specs()
            .into_iter()
            .map(|(name, spec)| {
                let horizon = if name == "beta1" { 2_000 } else { 20_000 };
                let cov = covariance_from_spec(&spec, horizon).unwrap();
                let inv = invert_autocovariance(&cov, 1e-10).unwrap();
                (
                    name,
                    FigureModel {
                        spec,
                        distribution: inv.distribution,
                    },
                )
            })
            .collect()
    })
}

fn figure_model(name: &str) -> &'static FigureModel {
    &figure_models()
        .iter()
        .find(|(n, _)| *n == name)
        .expect("unknown figure model")
        .1
}

fn finish(criterion: &str, started: Instant, budget: Option<Duration>) {
    let elapsed = started.elapsed();
    println!("acceptance {criterion}: PASS ({elapsed:.2?})");
    if let Some(limit) = budget {
        assert!(
            elapsed <= limit,
            "{criterion} exceeded its runtime budget: {elapsed:.2?} > {limit:.2?}"
        );
    }
}

#[test]
fn criterion_1_exponential_inverse_closed_form() {
    let started = Instant::now();
    let spec = common::exponential_inverse_spec();
    let cov = covariance_from_spec(&spec, 400).unwrap();
    let inv = invert_autocovariance(&cov, 1e-10).unwrap();
    let w = &inv.distribution;

    let lambda = (1.0 + (-1.0f64).exp()) / 2.0;
    assert!((w.density(1) - lambda).abs() < 1e-12, "p(1) off");

    // (1/mu^3) sum_{n>t} Q(n) = (1/8) * lambda^t, within 1e-9 absolute.
    let proxy = tail_proxy(w, 50);
    for t in 0..=50 {
        let expected = 0.125 * lambda.powi(t as i32);
        assert!(
            (proxy.value(t) - expected).abs() < 1e-9,
            "tail proxy at t = {t}: {} vs {expected}",
            proxy.value(t)
        );
    }

    // Forward solver reproduces rho_t = (1/4) e^{-t} within 1e-10.
    let back = solve_renewal(w, 50);
    for t in 0..=50 {
        let expected = 0.25 * (-(t as f64)).exp();
        assert!(
            (back.autocovariance(t) - expected).abs() < 1e-10,
            "autocovariance at t = {t}"
        );
    }
    finish("1 (exponential inverse closed form)", started, Some(Duration::from_secs(1)));
}

#[test]
fn criterion_2_asymptotic_equivalence() {
    let started = Instant::now();
    // Subexponential cases: the prescribed autocovariance and the tail
    // proxy of the inverted law must agree within 15% on t in [200, 2000].
    //
    // Known red: the beta = 1/2 model genuinely sits at ratio 0.7603 at
    // t = 200 (its subexponential corrections decay like 1/sqrt(t), and
    // the value is confirmed by two independent inversion routes agreeing
    // to nine digits); it enters the 15% band only near t = 430. The
    // criterion is asserted as stated and this test documents the gap
    // rather than widening the band.
    let mut failures = Vec::new();
    for name in ["gamma2", "gamma4", "beta05"] {
        let model = figure_model(name);
        let proxy = tail_proxy(&model.distribution, 2_000);
        let mut worst: Option<(usize, f64)> = None;
        for t in 200..=2_000 {
            let ratio = model.spec.autocovariance(t) / proxy.value(t);
            if !(0.85..=1.15).contains(&ratio)
                && worst.is_none_or(|(_, w)| (ratio - 1.0).abs() > (w - 1.0).abs())
            {
                worst = Some((t, ratio));
            }
        }
        match worst {
            None => println!("acceptance 2: {name} within [0.85, 1.15] on [200, 2000]"),
            Some((t, ratio)) => {
                println!("acceptance 2: {name} FAILS the stated window (ratio {ratio:.4} at t = {t})");
                failures.push(format!("{name}: ratio {ratio:.4} at t = {t}"));
            }
        }
    }
    // Exponential case: decay rates differ, the ratio collapses.
    let beta1 = figure_model("beta1");
    let proxy = tail_proxy(&beta1.distribution, 20);
    let ratio = beta1.spec.autocovariance(20) / proxy.value(20);
    assert!(ratio < 0.5, "beta1 ratio {ratio} at t = 20");
    assert!(
        failures.is_empty(),
        "asymptotic-equivalence window violated: {failures:?}"
    );
    finish("2 (asymptotic equivalence, Figs 1-2)", started, Some(Duration::from_secs(60)));
}

#[test]
fn criterion_3_enumeration_oracle() {
    let started = Instant::now();
    for (name, w) in model_zoo() {
        // Normalization within 1e-12 and reversibility within 1e-14,
        // t <= 12.
        for len in 1..=12usize {
            let mut total = 0.0;
            for mask in 0u64..(1 << len) {
                let pat = pattern_from_mask(mask, len);
                let p = joint_probability(&w, &pat).unwrap();
                total += p;
                let mut rev = pat.clone();
                rev.reverse();
                let q = joint_probability(&w, &rev).unwrap();
                assert!((p - q).abs() < 1e-14, "{name}: reversibility {len}/{mask}");
            }
            assert!((total - 1.0).abs() < 1e-12, "{name}: normalization at {len}");
        }

        // Brute-force pair probability vs the renewal solver, t <= 11,
        // within 1e-12.
        let cov = solve_renewal(&w, 11);
        for t in 0..=11usize {
            let len = t + 1;
            let mut brute = 0.0;
            for mask in 0u64..(1 << len) {
                if mask & 1 != 0 && (mask >> (len - 1)) & 1 != 0 {
                    brute += joint_probability(&w, &pattern_from_mask(mask, len)).unwrap();
                }
            }
            assert!(
                (brute - cov.pair_probability(t)).abs() < 1e-12,
                "{name}: c_{t}"
            );
        }

        // Factorization across a renewal within 1e-12, t <= 10.
        let c0 = 1.0 / w.mean();
        for len in 2..=10usize {
            for mask in 0u64..(1 << len) {
                let pat = pattern_from_mask(mask, len);
                for s in 1..=len {
                    if pat[s - 1] != 1 {
                        continue;
                    }
                    let joint = joint_probability(&w, &pat).unwrap();
                    let past = joint_probability(&w, &pat[..s]).unwrap();
                    let future = joint_probability(&w, &pat[s - 1..]).unwrap();
                    assert!(
                        (joint * c0 - past * future).abs() < 1e-12,
                        "{name}: factorization {len}/{s}/{mask}"
                    );
                }
            }
        }

        // Chain rule vs the conditional law within 1e-13, t <= 11.
        for len in 1..=11usize {
            for mask in 0u64..(1 << len) {
                let pat = pattern_from_mask(mask, len);
                let base = joint_probability(&w, &pat).unwrap();
                if base == 0.0 {
                    continue;
                }
                let mut ext = pat.clone();
                ext.push(1);
                let joint = joint_probability(&w, &ext).unwrap();
                let cond = next_symbol_probability(&w, &pat).unwrap();
                assert!(
                    (joint - base * cond).abs() < 1e-13,
                    "{name}: chain rule {len}/{mask}"
                );
            }
        }
    }
    finish("3 (enumeration oracle)", started, Some(Duration::from_secs(30)));
}

#[test]
fn criterion_4_round_trip_inversion() {
    let started = Instant::now();
    let horizon = 10_000usize;
    for (name, spec) in figure_specs() {
        let cov = covariance_from_spec(&spec, horizon).unwrap();
        let inv = invert_autocovariance(&cov, 1e-10).unwrap();
        let back = solve_renewal(&inv.distribution, horizon);
        let mut worst = 0.0f64;
        for t in 0..horizon {
            worst = worst.max((back.pair_probability(t) - cov.pair_probability(t)).abs());
        }
        println!("acceptance 4: {name} max |c - c'| = {worst:.2e}");
        assert!(worst < 1e-10, "{name}: max |c - c'| = {worst:e}");
    }
    finish("4 (round-trip inversion)", started, Some(Duration::from_secs(60)));
}

#[test]
fn criterion_5_second_moment_identity() {
    let started = Instant::now();
    // Geometric: both sides equal 6 in closed form.
    let w = WaitingTimeDistribution::geometric(2.0).unwrap();
    let cov = solve_renewal(&w, 64);
    let id = second_moment_identity(&w, &cov).unwrap();
    assert!((id.direct - 6.0).abs() < 1e-12, "direct = {}", id.direct);
    assert!(
        (id.via_autocovariance - 6.0).abs() < 1e-12,
        "via = {}",
        id.via_autocovariance
    );

    // Figure models with finite second moments: relative gap below 1e-6.
    for name in ["gamma4", "beta05"] {
        let model = figure_model(name);
        let cov = solve_renewal(&model.distribution, 2_000);
        let id = second_moment_identity(&model.distribution, &cov).unwrap();
        println!(
            "acceptance 5: {name} lhs {:.9} vs rhs {:.9} (relative gap {:.2e})",
            id.direct, id.via_autocovariance, id.relative_gap
        );
        assert!(
            id.relative_gap < 1e-6,
            "{name}: relative gap {:e}",
            id.relative_gap
        );
    }
    finish("5 (second-moment identity)", started, None);
}

#[test]
fn criterion_6_equipartition() {
    let started = Instant::now();
    // Fair coin: the statistic is 2 ln 2 for every sequence.
    let w = WaitingTimeDistribution::geometric(2.0).unwrap();
    let sampler = Sampler::new(&w);
    for (k, len) in [(0u64, 1usize), (1, 17), (2, 1_000), (3, 12_345), (4, 200_000)] {
        let seq = sampler.generate(len, stream_seed(0xAE9, k));
        let ll = log_likelihood(&w, &seq).unwrap();
        assert!(
            (ll.aep_statistic - 2.0 * std::f64::consts::LN_2).abs() < 1e-12,
            "fair coin aep at len {len}"
        );
    }

    // Polynomial figure model at t = 1e5: the statistic concentrates
    // within 0.02 of the waiting-time entropy on at least 95 of 100
    // replicas.
    let model = figure_model("gamma2");
    let entropy = entropy_summary(&model.distribution, 1).waiting_entropy;
    let sampler = Sampler::new(&model.distribution);
    let replicas = sampler.generate_replicas(100_000, 0x05EE_DAE9, 100, 4);
    let mut hits = 0;
    for seq in &replicas {
        let ll = log_likelihood(&model.distribution, seq).unwrap();
        if (ll.aep_statistic - entropy).abs() < 0.02 {
            hits += 1;
        }
    }
    println!("acceptance 6: {hits}/100 replicas within 0.02 of the entropy");
    assert!(hits >= 95, "only {hits}/100 replicas inside the AEP band");
    finish("6 (asymptotic equipartition)", started, Some(Duration::from_secs(120)));
}

#[test]
fn criterion_7_clt_coverage() {
    let started = Instant::now();
    let model = figure_model("gamma2");
    let w = &model.distribution;
    let cov = solve_renewal(w, 64);
    let sampler = Sampler::new(w);
    let t = 10_000usize;
    let replicas = sampler.generate_replicas(t, 0xC0FE, 200, 4);

    // Waiting-time density at s = 1.
    let mut covered = 0usize;
    let mut estimates = Vec::with_capacity(replicas.len());
    let mut variance = 0.0;
    for seq in &replicas {
        let report = estimate_waiting_time(seq, w, 1).unwrap();
        variance = report.variance;
        if (report.estimate - report.true_value).abs() <= report.half_width {
            covered += 1;
        }
        estimates.push(report.estimate);
    }
    let devs = standardized_deviations(&estimates, variance, w.density(1), t).unwrap();
    let var = sample_variance(&devs);
    println!("acceptance 7: p(1) coverage {covered}/200, standardized variance {var:.3}");
    assert!(
        (178..=198).contains(&covered),
        "p(1) coverage {covered}/200 outside [178, 198]"
    );
    assert!(
        (0.7..=1.3).contains(&var),
        "standardized p(1) variance {var}"
    );

    // Autocovariance at lag 1.
    let mut covered = 0usize;
    let mut estimates = Vec::with_capacity(replicas.len());
    let mut variance = 0.0;
    let truth = cov.autocovariance(1);
    for seq in &replicas {
        let est = estimate_autocovariance(seq, w, &cov, 1).unwrap();
        variance = est.report.variance;
        if (est.report.estimate - est.report.true_value).abs() <= est.report.half_width {
            covered += 1;
        }
        estimates.push(est.report.estimate);
    }
    let devs = standardized_deviations(&estimates, variance, truth, t).unwrap();
    let var = sample_variance(&devs);
    println!("acceptance 7: rho_1 coverage {covered}/200, standardized variance {var:.3}");
    assert!(
        (178..=198).contains(&covered),
        "rho_1 coverage {covered}/200 outside [178, 198]"
    );
    assert!(
        (0.7..=1.3).contains(&var),
        "standardized rho_1 variance {var}"
    );
    finish("7 (CLT coverage)", started, Some(Duration::from_secs(300)));
}

#[test]
fn criterion_8_estimation_range() {
    let started = Instant::now();
    let model = figure_model("gamma2");
    let w = &model.distribution;
    let sampler = Sampler::new(w);
    let seq = sampler.generate(1_000_000, stream_seed(0xF165, 0));

    // Reliable regime: relative error below 20% for every s <= 20.
    let mut worst = 0.0f64;
    for s in 1..=20usize {
        let report = estimate_waiting_time(&seq, w, s).unwrap();
        let rel = (report.estimate - report.true_value).abs() / report.true_value;
        worst = worst.max(rel);
        assert!(rel < 0.20, "s = {s}: relative error {rel}");
    }
    // Breakdown regime: somewhere past s = 80 the error exceeds 50%.
    let mut breakdown = None;
    for s in 80..=120usize {
        let report = estimate_waiting_time(&seq, w, s).unwrap();
        let rel = (report.estimate - report.true_value).abs() / report.true_value;
        if rel > 0.50 {
            breakdown = Some((s, rel));
            break;
        }
    }
    let (bs, brel) = breakdown.expect("no breakdown found for s in [80, 120]");
    println!(
        "acceptance 8: worst relative error {:.1}% for s <= 20; breakdown at s = {bs} ({:.0}%)",
        100.0 * worst,
        100.0 * brel
    );
    finish("8 (estimation range guidance)", started, Some(Duration::from_secs(300)));
}

#[test]
fn criterion_9_mixing_bound() {
    let started = Instant::now();
    // Geometric closed form: bound 4 at lag 1, zero afterwards.
    let w = WaitingTimeDistribution::geometric(2.0).unwrap();
    let cov = solve_renewal(&w, 256);
    let bounds = alpha_mixing_bound(&w, &cov, 10, 1e-9).unwrap();
    assert!((bounds.bound(1) - 4.0).abs() < 1e-12);
    for t in 2..=10 {
        assert!(bounds.bound(t).abs() < 1e-12, "lag {t}");
    }

    // gamma = 4 figure model: the partial sum converges (last decade
    // below 1e-6 of the total).
    let model = figure_model("gamma4");
    let cov = solve_renewal(&model.distribution, 16_384);
    let bounds = alpha_mixing_bound(&model.distribution, &cov, 2_000, 1e-6).unwrap();
    let ratio = bounds.last_decade_ratio();
    println!(
        "acceptance 9: gamma4 partial sum {:.6}, last-decade share {ratio:.2e}",
        bounds.partial_sum(2_000)
    );
    assert!(ratio < 1e-6, "last-decade share {ratio:e}");
    for t in 2..=2_000 {
        assert!(bounds.bound(t) <= bounds.bound(t - 1) * (1.0 + 1e-12));
    }
    finish("9 (strong-mixing bound)", started, None);
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}
