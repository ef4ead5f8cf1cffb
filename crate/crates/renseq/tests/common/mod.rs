//! Shared fixtures for the integration suites.

#![allow(dead_code)]

use renseq::dist::WaitingTimeDistribution;
use renseq::inverse::{covariance_from_spec, invert_autocovariance, CovarianceSpec, PhiKind};
use renseq::renewal::CovarianceSequence;

/// Pattern of length `len` from the bits of `mask` (bit k = symbol k+1).
pub fn pattern_from_mask(mask: u64, len: usize) -> Vec<u8> {
    (0..len).map(|k| ((mask >> k) & 1) as u8).collect()
}

/// One representative of every built-in family, at enumeration-friendly
/// sizes.
pub fn model_zoo() -> Vec<(&'static str, WaitingTimeDistribution)> {
    vec![
        ("geometric", WaitingTimeDistribution::geometric(2.0).unwrap()),
        ("deterministic", WaitingTimeDistribution::geometric(1.0).unwrap()),
        (
            "markov1",
            WaitingTimeDistribution::markov_family(&[0.1, 0.45], 0.5).unwrap(),
        ),
        (
            "polynomial2",
            WaitingTimeDistribution::polynomial_tail(2.0, 1.0).unwrap(),
        ),
        (
            "stretched05",
            WaitingTimeDistribution::stretched_exp_tail(0.5, 1.0).unwrap(),
        ),
        ("exp-inverse", exponential_inverse_model()),
        (
            "table",
            WaitingTimeDistribution::from_density(&[0.2, 0.5, 0.1, 0.2], 0.0).unwrap(),
        ),
    ]
}

/// The exactly solvable exponential inverse case
/// `c_t = 1/4 + (1/4) e^{-t}`.
pub fn exponential_inverse_model() -> WaitingTimeDistribution {
    let spec = exponential_inverse_spec();
    let cov = covariance_from_spec(&spec, 400).unwrap();
    invert_autocovariance(&cov, 1e-10).unwrap().distribution
}

pub fn exponential_inverse_spec() -> CovarianceSpec {
    CovarianceSpec::new(0.5, 0.25, PhiKind::StretchedExp { beta: 1.0, kappa: 1.0 }).unwrap()
}

/// The four figure prescriptions: polynomial gamma in {2, 4} and
/// stretched-exponential beta in {1/2, 1}, all with xi = 1/2, m = 1/4.
pub fn figure_specs() -> Vec<(&'static str, CovarianceSpec)> {
    vec![
        (
            "gamma2",
            CovarianceSpec::new(0.5, 0.25, PhiKind::PowerLog { gamma: 2.0 }).unwrap(),
        ),
        (
            "gamma4",
            CovarianceSpec::new(0.5, 0.25, PhiKind::PowerLog { gamma: 4.0 }).unwrap(),
        ),
        (
            "beta05",
            CovarianceSpec::new(0.5, 0.25, PhiKind::StretchedExp { beta: 0.5, kappa: 1.0 })
                .unwrap(),
        ),
        (
            "beta1",
            CovarianceSpec::new(0.5, 0.25, PhiKind::StretchedExp { beta: 1.0, kappa: 1.0 })
                .unwrap(),
        ),
    ]
}

/// Invert one figure spec at the given horizon.
pub fn inverted_figure_model(
    spec: &CovarianceSpec,
    horizon: usize,
) -> (CovarianceSequence, WaitingTimeDistribution) {
    let cov = covariance_from_spec(spec, horizon).unwrap();
    let inv = invert_autocovariance(&cov, 1e-10).unwrap();
    (cov, inv.distribution)
}
