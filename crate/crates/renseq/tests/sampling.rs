//! Statistical checks of the sampler against the exact block laws.
//!
//! All seeds are fixed; bands are four standard deviations (plus a unit of
//! discreteness slack) unless noted, wide enough to be stable yet tight
//! enough to catch a wrong delay law, tie rule, or stream derivation.

mod common;

use common::pattern_from_mask;
use renseq::dist::WaitingTimeDistribution;
use renseq::estimators::{estimate_waiting_time, standardized_deviations};
use renseq::likelihood::joint_probability;
use renseq::rng::{stream_seed, SplitMix64};
use renseq::sampler::Sampler;
use renseq::seq::BinarySequence;

fn window_mask(seq: &BinarySequence, start: usize, width: usize) -> usize {
    (0..width)
        .map(|k| (seq.get(start + k) as usize) << k)
        .sum()
}

fn sample_variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
}

#[test]
fn short_blocks_follow_the_exact_law() {
    // Fair coin: every length-3 pattern has probability 1/8.
    let w = WaitingTimeDistribution::geometric(2.0).unwrap();
    let sampler = Sampler::new(&w);
    let n = 1_000_000usize;
    let mut counts = [0u64; 8];
    for k in 0..n {
        let seq = sampler.generate(3, stream_seed(0xFA1B, k as u64));
        counts[window_mask(&seq, 0, 3)] += 1;
    }
    let expected = n as f64 / 8.0;
    let sigma = (n as f64 * (1.0 / 8.0) * (7.0 / 8.0)).sqrt();
    for (mask, &c) in counts.iter().enumerate() {
        assert!(
            (c as f64 - expected).abs() < 4.0 * sigma + 1.0,
            "pattern {mask:03b}: count {c}, expected {expected}"
        );
    }
}

#[test]
fn sampled_windows_are_shift_invariant() {
    // The empirical law of a 4-symbol window must match the exact block
    // law at every offset.
    let models = [
        WaitingTimeDistribution::geometric(2.0).unwrap(),
        WaitingTimeDistribution::markov_family(&[0.1, 0.45], 0.5).unwrap(),
    ];
    let n = 100_000usize;
    for (mi, w) in models.iter().enumerate() {
        let sampler = Sampler::new(w);
        let mut counts = [[0u64; 16]; 6];
        for k in 0..n {
            let seq = sampler.generate(9, stream_seed(0x57A7 + mi as u64, k as u64));
            for (shift, row) in counts.iter_mut().enumerate() {
                row[window_mask(&seq, shift, 4)] += 1;
            }
        }
        for mask in 0..16u64 {
            let p = joint_probability(w, &pattern_from_mask(mask, 4)).unwrap();
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            for (shift, row) in counts.iter().enumerate() {
                let c = row[mask as usize] as f64;
                assert!(
                    (c - n as f64 * p).abs() < 4.0 * sigma + 1.0,
                    "model {mi}, shift {shift}, pattern {mask:04b}: {c} vs {}",
                    n as f64 * p
                );
            }
        }
    }
}

#[test]
fn renewals_split_past_from_future_empirically() {
    // Conditional on a renewal in the middle, the 3-symbol past and future
    // blocks are independent with the block law's conditionals.
    let w = WaitingTimeDistribution::markov_family(&[0.1, 0.45], 0.5).unwrap();
    let sampler = Sampler::new(&w);
    let n = 400_000usize;
    let mut joint = [[0u64; 8]; 8];
    let mut conditioned = 0u64;
    for k in 0..n {
        let seq = sampler.generate(7, stream_seed(0x9E6E, k as u64));
        if seq.get(3) {
            conditioned += 1;
            joint[window_mask(&seq, 0, 3)][window_mask(&seq, 4, 3)] += 1;
        }
    }
    let c0 = 1.0 / w.mean();
    // Exact conditionals, P[block | renewal at the boundary].
    let mut past = [0.0f64; 8];
    let mut future = [0.0f64; 8];
    for mask in 0..8u64 {
        let mut with_one = pattern_from_mask(mask, 3);
        with_one.push(1);
        past[mask as usize] = joint_probability(&w, &with_one).unwrap() / c0;
        let mut after_one = vec![1u8];
        after_one.extend(pattern_from_mask(mask, 3));
        future[mask as usize] = joint_probability(&w, &after_one).unwrap() / c0;
    }
    let nc = conditioned as f64;
    for a in 0..8 {
        for b in 0..8 {
            let p = past[a] * future[b];
            let sigma = (nc * p * (1.0 - p)).sqrt();
            let c = joint[a][b] as f64;
            assert!(
                (c - nc * p).abs() < 4.0 * sigma + 1.0,
                "blocks ({a:03b}, {b:03b}): {c} vs {}",
                nc * p
            );
        }
    }
}

#[test]
fn sampled_blocks_are_reversible() {
    let w = WaitingTimeDistribution::polynomial_tail(2.0, 1.0).unwrap();
    let sampler = Sampler::new(&w);
    let n = 200_000usize;
    let mut counts = [0u64; 16];
    for k in 0..n {
        let seq = sampler.generate(4, stream_seed(0x4EF, k as u64));
        counts[window_mask(&seq, 0, 4)] += 1;
    }
    for mask in 0..16usize {
        let rev = (0..4).fold(0usize, |acc, k| acc | (((mask >> k) & 1) << (3 - k)));
        if rev <= mask {
            continue;
        }
        let p = joint_probability(&w, &pattern_from_mask(mask as u64, 4)).unwrap();
        let q = joint_probability(&w, &pattern_from_mask(rev as u64, 4)).unwrap();
        assert!((p - q).abs() < 1e-14);
        let diff = counts[mask] as f64 - counts[rev] as f64;
        let sigma = (n as f64 * (p + q)).sqrt();
        assert!(
            diff.abs() < 4.0 * sigma + 1.0,
            "pattern {mask:04b} vs reversal {rev:04b}: counts {} vs {}",
            counts[mask],
            counts[rev]
        );
    }
}

#[test]
fn waiting_time_draws_have_the_right_mean() {
    let w = WaitingTimeDistribution::polynomial_tail(2.0, 1.0).unwrap();
    let sampler = Sampler::new(&w);
    let mut rng = SplitMix64::new(0xD12A);
    let n = 1_000_000usize;
    let mut sum = 0.0f64;
    for _ in 0..n {
        sum += sampler.sample_waiting(&mut rng) as f64;
    }
    let mean = sum / n as f64;
    let sd = (w.second_moment().unwrap() - w.mean() * w.mean()).sqrt();
    assert!(
        (mean - w.mean()).abs() < 3.0 * sd / (n as f64).sqrt(),
        "draw mean {mean} vs model mean {}",
        w.mean()
    );
}

#[test]
fn delay_draws_have_the_right_mean() {
    // E[S1] = (E[S^2] + E[S]) / (2 E[S]) = 2 for the fair coin.
    let w = WaitingTimeDistribution::geometric(2.0).unwrap();
    let sampler = Sampler::new(&w);
    let mut rng = SplitMix64::new(0xDE1A);
    let n = 1_000_000usize;
    let mut sum = 0.0f64;
    for _ in 0..n {
        sum += sampler.sample_first_waiting(&mut rng) as f64;
    }
    let mean = sum / n as f64;
    assert!((mean - 2.0).abs() < 0.01, "delay mean {mean}");
}

#[test]
fn standardized_symbol_means_have_unit_variance() {
    let w = WaitingTimeDistribution::geometric(2.0).unwrap();
    let sampler = Sampler::new(&w);
    let t = 10_000usize;
    let replicas = sampler.generate_replicas(t, 0xC17, 200, 4);
    let means: Vec<f64> = replicas.iter().map(|s| s.fraction_ones()).collect();
    // v_0 = 0.25 for the fair coin.
    let devs = standardized_deviations(&means, 0.25, 0.5, t).unwrap();
    let var = sample_variance(&devs);
    assert!((0.7..=1.3).contains(&var), "standardized variance {var}");
    let mean_dev = devs.iter().sum::<f64>() / devs.len() as f64;
    assert!(mean_dev.abs() < 4.0 / (devs.len() as f64).sqrt());
}

#[test]
fn standardized_gap_estimates_have_unit_variance() {
    let w = WaitingTimeDistribution::geometric(2.0).unwrap();
    let sampler = Sampler::new(&w);
    let t = 10_000usize;
    let replicas = sampler.generate_replicas(t, 0xC18, 200, 4);
    let estimates: Vec<f64> = replicas
        .iter()
        .map(|s| estimate_waiting_time(s, &w, 1).unwrap().estimate)
        .collect();
    let devs = standardized_deviations(&estimates, 1.25, 0.5, t).unwrap();
    let var = sample_variance(&devs);
    assert!((0.7..=1.3).contains(&var), "standardized variance {var}");
}

#[test]
fn window_product_tracks_pair_probability_on_heavy_tails() {
    // The empirical mean of x_1 x_3 estimates c_2, with the renewal solver
    // as truth; the band is self-calibrated from replica scatter.
    let w = WaitingTimeDistribution::polynomial_tail(2.0, 1.0).unwrap();
    let truth = renseq::renewal::solve_renewal(&w, 2).pair_probability(2);
    let sampler = Sampler::new(&w);
    let n = 50usize;
    let means: Vec<f64> = (0..n)
        .map(|k| {
            let seq = sampler.generate(200_000, stream_seed(0x13, k as u64));
            renseq::estimators::empirical_mean(&seq, 3, |win| (win[0] * win[2]) as f64).unwrap()
        })
        .collect();
    let grand = means.iter().sum::<f64>() / n as f64;
    let sd = sample_variance(&means).sqrt();
    assert!(
        (grand - truth).abs() < 5.0 * sd / (n as f64).sqrt(),
        "grand mean {grand} vs c_2 {truth} (sd {sd})"
    );
}

#[test]
fn heavy_tail_symbol_mean_in_clt_band() {
    // Polynomial tail model: the symbol frequency lands within the v_0
    // band around 1/mu.
    let w = WaitingTimeDistribution::polynomial_tail(2.0, 1.0).unwrap();
    let sampler = Sampler::new(&w);
    let t = 1_000_000usize;
    let seq = sampler.generate(t, 0x6E0);
    let mu = w.mean();
    let v0 = w.second_moment().unwrap() / mu.powi(3) - 1.0 / mu;
    assert!(
        (seq.fraction_ones() - 1.0 / mu).abs() < 4.0 * (v0 / t as f64).sqrt(),
        "fraction {} vs 1/mu {}",
        seq.fraction_ones(),
        1.0 / mu
    );
}

#[test]
fn null_lag_estimates_standardize_within_four_sigma() {
    // i.i.d. model: rho_1 = 0; every standardized replica estimate stays
    // inside +-4.
    let w = WaitingTimeDistribution::geometric(2.0).unwrap();
    let cov = renseq::renewal::solve_renewal(&w, 16);
    let sampler = Sampler::new(&w);
    let t = 10_000usize;
    let replicas = sampler.generate_replicas(t, 0x41, 200, 4);
    let mut estimates = Vec::new();
    let mut variance = 0.0;
    for seq in &replicas {
        let est = renseq::estimators::estimate_autocovariance(seq, &w, &cov, 1).unwrap();
        variance = est.report.variance;
        estimates.push(est.report.estimate);
    }
    let devs = standardized_deviations(&estimates, variance, 0.0, t).unwrap();
    assert!(devs.iter().all(|d| d.abs() < 4.0));
}

#[test]
fn replica_mean_fluctuations_scale_with_t() {
    // Sample variance of sqrt(t) * (mean - 1/2) across i.i.d. replicas
    // approximates rho_0 = 1/4.
    let w = WaitingTimeDistribution::geometric(2.0).unwrap();
    let sampler = Sampler::new(&w);
    let t = 10_000usize;
    let replicas = sampler.generate_replicas(t, 7, 100, 2);
    let scaled: Vec<f64> = replicas
        .iter()
        .map(|s| (t as f64).sqrt() * (s.fraction_ones() - 0.5))
        .collect();
    let var = sample_variance(&scaled);
    assert!(
        (var - 0.25).abs() < 0.25 * 0.25,
        "scaled variance {var} not within 25% of 0.25"
    );
}

#[test]
fn sequences_survive_disk_round_trip() {
    let w = WaitingTimeDistribution::polynomial_tail(2.0, 1.0).unwrap();
    let sampler = Sampler::new(&w);
    let seq = sampler.generate(12_345, 0xF11E);
    let path = std::env::temp_dir().join("renseq_roundtrip_test.rbsq");
    seq.save(&path).unwrap();
    let back = BinarySequence::load(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(seq, back);
}
