//! Empirical means, the waiting-time and autocovariance estimators with
//! their theoretical CLT variances, the strong-mixing bound, and the
//! second-moment identity.
//!
//! For an observable of finitely many symbols the time average obeys a
//! law of large numbers, and a central limit theorem whenever the waiting
//! time has a finite second moment; the per-step variance of the limit is
//! `v = cov[Z_0, Z_0] + 2 sum_{n >= 1} cov[Z_0, Z_n]`. The two estimators
//! implemented here have closed-form `v`:
//!
//! * waiting-time density at `s`, via `G = mu * x_1 (1-x_2)..(1-x_s) x_{s+1}`:
//!   `v_s = mu p(s) - 2 s p(s)^2 + p(s)^2 M2 / mu` with `M2 = sum n^2 p(n)`;
//! * autocovariance at `tau`, via `G = x_1 x_{tau+1} - 1/mu^2`:
//!   `v_0 = M2/mu^3 - 1/mu`, and for `tau >= 1`
//!   `v_tau = 2 sum_{n=0}^{tau} (mu^2 c_n^2 c_{tau-n} - c_tau^2)
//!            + c_tau^2 M2 / mu - c_tau - 2 (mu - 1) c_tau^2`.
//!
//! Everything treats the mean waiting time as known; when it is not, its
//! reciprocal is estimated by the empirical frequency of ones, whose
//! variance is exactly `v_0`.

use crate::dist::WaitingTimeDistribution;
use crate::error::{Error, Result};
use crate::renewal::CovarianceSequence;
use crate::seq::BinarySequence;
use crate::sum::{compensated_sum, Neumaier};

/// Multiplier for reported confidence half-widths (two-sigma band).
pub const HALF_WIDTH_Z: f64 = 2.0;

/// Which quantity an estimate targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateTarget {
    /// Waiting-time density at `s`.
    WaitingTime { s: usize },
    /// Autocovariance at lag `tau`.
    Autocovariance { tau: usize },
    /// Symbol mean `1/mu`.
    MeanRate,
}

impl EstimateTarget {
    pub fn label(&self) -> &'static str {
        match self {
            EstimateTarget::WaitingTime { .. } => "p",
            EstimateTarget::Autocovariance { .. } => "rho",
            EstimateTarget::MeanRate => "mean",
        }
    }

    pub fn index(&self) -> usize {
        match *self {
            EstimateTarget::WaitingTime { s } => s,
            EstimateTarget::Autocovariance { tau } => tau,
            EstimateTarget::MeanRate => 0,
        }
    }
}

/// Point estimate with its theoretical CLT variance and confidence
/// half-width `z * sqrt(v / t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationReport {
    pub target: EstimateTarget,
    pub estimate: f64,
    /// Model value of the target, when the model is supplied.
    pub true_value: f64,
    /// Per-step CLT variance `v`; infinite when the second moment is
    /// flagged infinite.
    pub variance: f64,
    pub half_width: f64,
    pub sample_len: usize,
    pub z: f64,
}

impl EstimationReport {
    fn new(target: EstimateTarget, estimate: f64, true_value: f64, variance: f64, t: usize) -> Self {
        Self {
            target,
            estimate,
            true_value,
            variance,
            half_width: HALF_WIDTH_Z * (variance / t as f64).sqrt(),
            sample_len: t,
            z: HALF_WIDTH_Z,
        }
    }
}

/// Autocovariance estimate plus the large-lag limit of its variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AutocovarianceEstimate {
    pub report: EstimationReport,
    /// `sigma^2 = lim_tau v_tau`, from the solved covariance sequence.
    pub limit_variance: f64,
    /// Proxy for the part of `sigma^2` beyond the solver horizon.
    pub limit_variance_tail: f64,
}

/// Both routes of the second-moment identity
/// `sum s^2 p(s) = mu + 2 mu^3 sum_{t>=0} rho_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentIdentity {
    /// Direct table sum `sum s^2 p(s)`.
    pub direct: f64,
    /// `mu + 2 mu^3 * sum rho_t` with `rho` from the renewal solver.
    pub via_autocovariance: f64,
    pub relative_gap: f64,
    /// Proxy for the autocovariance mass beyond the solver horizon.
    pub tail_remainder: f64,
}

/// Upper bounds on the strong-mixing coefficients.
#[derive(Debug, Clone)]
pub struct MixingBoundSequence {
    bounds: Vec<f64>,
    partial_sums: Vec<f64>,
}

impl MixingBoundSequence {
    /// Bound on `alpha_t`, `t >= 1`.
    pub fn bound(&self, t: usize) -> f64 {
        self.bounds[t - 1]
    }

    /// `sum_{u=1}^{t} bound(u)`.
    pub fn partial_sum(&self, t: usize) -> f64 {
        self.partial_sums[t - 1]
    }

    pub fn max_lag(&self) -> usize {
        self.bounds.len()
    }

    /// Share of the partial sum contributed by the last decade of lags.
    pub fn last_decade_ratio(&self) -> f64 {
        let total = *self.partial_sums.last().unwrap();
        if total == 0.0 {
            return 0.0;
        }
        let cut = (self.bounds.len() / 10).max(1);
        (total - self.partial_sums[cut - 1]) / total
    }
}

/// Mean of a sliding-window observable over all `t - w + 1` complete
/// windows.
pub fn empirical_mean<F>(seq: &BinarySequence, window: usize, observable: F) -> Result<f64>
where
    F: Fn(&[u8]) -> f64,
{
    let t = seq.len();
    if window == 0 || window > t {
        return Err(Error::WindowTooLarge {
            window,
            length: t,
        });
    }
    let mut buf = vec![0u8; window];
    let mut acc = Neumaier::new();
    for start in 0..=(t - window) {
        seq.window(start, &mut buf);
        acc.add(observable(&buf));
    }
    Ok(acc.total() / (t - window + 1) as f64)
}

fn second_moment_or_infinite(w: &WaitingTimeDistribution) -> f64 {
    w.second_moment().unwrap_or(f64::INFINITY)
}

/// Estimate `p(s)` from the empirical frequency of the pattern
/// `1 0^(s-1) 1`, scaled by the known mean.
pub fn estimate_waiting_time(
    seq: &BinarySequence,
    w: &WaitingTimeDistribution,
    s: usize,
) -> Result<EstimationReport> {
    assert!(s >= 1);
    let t = seq.len();
    if t <= s + 1 {
        return Err(Error::WindowTooLarge {
            window: s + 1,
            length: t,
        });
    }
    let mu = w.mean();
    let mut count = 0usize;
    let mut prev: Option<usize> = None;
    for a in seq.iter_ones() {
        if prev.is_some_and(|p| a - p == s) {
            count += 1;
        }
        prev = Some(a);
    }
    let windows = (t - s) as f64;
    let estimate = mu * count as f64 / windows;

    let p = w.density(s);
    let m2 = second_moment_or_infinite(w);
    let variance = if p == 0.0 {
        0.0
    } else {
        mu * p - 2.0 * (s as f64) * p * p + p * p * m2 / mu
    };
    Ok(EstimationReport::new(
        EstimateTarget::WaitingTime { s },
        estimate,
        p,
        variance,
        t,
    ))
}

/// Estimate `rho_tau` from pair frequencies at lag `tau`.
///
/// `cov` must be the model's covariance sequence solved to at least `tau`;
/// it supplies both the comparison truth and the variance terms.
pub fn estimate_autocovariance(
    seq: &BinarySequence,
    w: &WaitingTimeDistribution,
    cov: &CovarianceSequence,
    tau: usize,
) -> Result<AutocovarianceEstimate> {
    let t = seq.len();
    if t <= tau + 1 {
        return Err(Error::WindowTooLarge {
            window: tau + 1,
            length: t,
        });
    }
    if cov.horizon() < tau {
        return Err(Error::HorizonInsufficient {
            horizon: cov.horizon(),
            detail: format!("covariance solved to {} but lag {tau} requested", cov.horizon()),
        });
    }
    let mu = w.mean();
    let c0 = 1.0 / mu;

    let estimate = if tau == 0 {
        seq.fraction_ones() - c0 * c0
    } else {
        let mut count = 0usize;
        for a in seq.iter_ones() {
            if a + tau < t && seq.get(a + tau) {
                count += 1;
            }
        }
        count as f64 / (t - tau) as f64 - c0 * c0
    };

    let m2 = second_moment_or_infinite(w);
    let variance = variance_at_lag(w, cov, tau, m2);
    let (limit_variance, limit_variance_tail) = limit_variance(w, cov);

    Ok(AutocovarianceEstimate {
        report: EstimationReport::new(
            EstimateTarget::Autocovariance { tau },
            estimate,
            cov.autocovariance(tau),
            variance,
            t,
        ),
        limit_variance,
        limit_variance_tail,
    })
}

// The covariance series of the lag estimator is, with u_t = c_t / c_0 the
// conditional renewal probability,
//   cov[Z_0, Z_n] = mu^2 c_n^2 c_{tau-n} - c_tau^2   for 0 <= n <= tau,
//   cov[Z_0, Z_n] = mu^2 c_tau^2 rho_{n-tau}         for n > tau,
// and v_tau = cov_0 + 2 sum_{n>=1} cov_n collapses via the second-moment
// identity to the closed form below. (The two branch formulas coincide at
// n = tau; counting that term in both sums would inflate the result by
// 2 (mu - 1) c_tau^2 -- a slip worth guarding because the i.i.d. case has
// rho_{t>=1} = 0 and cannot detect it. The enumeration oracle in
// tests/variance_oracle.rs pins the correct value.)
fn variance_at_lag(
    w: &WaitingTimeDistribution,
    cov: &CovarianceSequence,
    tau: usize,
    m2: f64,
) -> f64 {
    let mu = w.mean();
    if tau == 0 {
        return m2 / (mu * mu * mu) - 1.0 / mu;
    }
    let ct = cov.pair_probability(tau);
    let mut acc = Neumaier::new();
    for n in 0..=tau {
        let cn = cov.pair_probability(n);
        acc.add(mu * mu * cn * cn * cov.pair_probability(tau - n) - ct * ct);
    }
    2.0 * acc.total() + ct * ct * m2 / mu - ct - 2.0 * (mu - 1.0) * ct * ct
}

/// Large-lag limit of the autocovariance-estimator variance,
/// `sigma^2 = c_0^2 (1 - 6 c_0 + 5 c_0^2) + 8 c_0^2 sum_t rho_t +
/// 2 sum_{t>=1} rho_t^2`, plus a proxy for the truncated part of the
/// sums. (Limit of `variance_at_lag`; the i.i.d. fair coin gives 5/16,
/// confirmed by direct covariance-series evaluation.)
pub fn limit_variance(w: &WaitingTimeDistribution, cov: &CovarianceSequence) -> (f64, f64) {
    let mu = w.mean();
    let c0 = 1.0 / mu;
    let rho = cov.autocovariances();
    let mut sum = Neumaier::new();
    let mut sum_sq = Neumaier::new();
    for (t, &r) in rho.iter().enumerate() {
        sum.add(r);
        if t >= 1 {
            sum_sq.add(r * r);
        }
    }
    let sigma_sq = c0 * c0 * (1.0 - 6.0 * c0 + 5.0 * c0 * c0)
        + 8.0 * c0 * c0 * sum.total()
        + 2.0 * sum_sq.total();
    // Tail proxy: rho_t ~ (1/mu^3) sum_{n>t} Q(n) beyond the horizon, so
    // sum_{t>H} rho_t ~ (1/mu^3) sum_{u>H+1} (u - H - 1) Q(u).
    let h = cov.horizon();
    let mut tail = Neumaier::new();
    for u in h + 2..=w.support_max() {
        tail.add((u - h - 1) as f64 * w.tail(u));
    }
    let rho_tail = tail.total() / (mu * mu * mu);
    (sigma_sq, 8.0 * c0 * c0 * rho_tail)
}

/// All waiting-time estimates up to `max_s` in one pass over the sequence:
/// a single gap histogram serves every index, where the per-index
/// [`estimate_waiting_time`] would rescan the bitmap each time.
pub fn waiting_time_profile(
    seq: &BinarySequence,
    w: &WaitingTimeDistribution,
    max_s: usize,
) -> Result<Vec<EstimationReport>> {
    assert!(max_s >= 1);
    let t = seq.len();
    if t <= max_s + 1 {
        return Err(Error::WindowTooLarge {
            window: max_s + 1,
            length: t,
        });
    }
    let mu = w.mean();
    let m2 = second_moment_or_infinite(w);
    let mut counts = vec![0usize; max_s + 1];
    let mut prev: Option<usize> = None;
    for a in seq.iter_ones() {
        if let Some(p) = prev {
            let gap = a - p;
            if gap <= max_s {
                counts[gap] += 1;
            }
        }
        prev = Some(a);
    }
    Ok((1..=max_s)
        .map(|s| {
            let estimate = mu * counts[s] as f64 / (t - s) as f64;
            let p = w.density(s);
            let variance = if p == 0.0 {
                0.0
            } else {
                mu * p - 2.0 * (s as f64) * p * p + p * p * m2 / mu
            };
            EstimationReport::new(EstimateTarget::WaitingTime { s }, estimate, p, variance, t)
        })
        .collect())
}

/// All autocovariance estimates up to `max_tau` in one pass over the
/// renewal positions.
pub fn autocovariance_profile(
    seq: &BinarySequence,
    w: &WaitingTimeDistribution,
    cov: &CovarianceSequence,
    max_tau: usize,
) -> Result<Vec<AutocovarianceEstimate>> {
    let t = seq.len();
    if t <= max_tau + 1 {
        return Err(Error::WindowTooLarge {
            window: max_tau + 1,
            length: t,
        });
    }
    if cov.horizon() < max_tau {
        return Err(Error::HorizonInsufficient {
            horizon: cov.horizon(),
            detail: format!(
                "covariance solved to {} but lag {max_tau} requested",
                cov.horizon()
            ),
        });
    }
    let mu = w.mean();
    let c0 = 1.0 / mu;
    let m2 = second_moment_or_infinite(w);
    let (limit, limit_tail) = limit_variance(w, cov);

    // Pair-distance histogram: every ordered pair of renewals at distance
    // tau <= max_tau is one product window (the left renewal is then
    // automatically within the first t - tau symbols).
    let positions = seq.one_positions();
    let mut counts = vec![0usize; max_tau + 1];
    counts[0] = positions.len();
    for (i, &a) in positions.iter().enumerate() {
        for &b in &positions[i + 1..] {
            let d = b - a;
            if d > max_tau {
                break;
            }
            counts[d] += 1;
        }
    }
    Ok((0..=max_tau)
        .map(|tau| {
            let estimate = counts[tau] as f64 / (t - tau) as f64 - c0 * c0;
            AutocovarianceEstimate {
                report: EstimationReport::new(
                    EstimateTarget::Autocovariance { tau },
                    estimate,
                    cov.autocovariance(tau),
                    variance_at_lag(w, cov, tau, m2),
                    t,
                ),
                limit_variance: limit,
                limit_variance_tail: limit_tail,
            }
        })
        .collect())
}

/// Estimate the symbol mean `1/mu`; its empirical-mean variance is exactly
/// the lag-zero variance `v_0`.
pub fn estimate_mean_rate(
    seq: &BinarySequence,
    w: &WaitingTimeDistribution,
) -> EstimationReport {
    let mu = w.mean();
    let m2 = second_moment_or_infinite(w);
    let variance = m2 / (mu * mu * mu) - 1.0 / mu;
    EstimationReport::new(
        EstimateTarget::MeanRate,
        seq.fraction_ones(),
        1.0 / mu,
        variance,
        seq.len(),
    )
}

/// Evaluate both sides of `sum s^2 p(s) = mu + 2 mu^3 sum_{t>=0} rho_t`.
pub fn second_moment_identity(
    w: &WaitingTimeDistribution,
    cov: &CovarianceSequence,
) -> Result<MomentIdentity> {
    let direct = w.second_moment().ok_or(Error::SecondMomentInfinite)?;
    let mu = w.mean();
    let rho_sum = compensated_sum(cov.autocovariances().iter().copied());
    let via = mu + 2.0 * mu * mu * mu * rho_sum;
    let h = cov.horizon();
    let mut tail = Neumaier::new();
    for u in h + 2..=w.support_max() {
        tail.add((u - h - 1) as f64 * w.tail(u));
    }
    let remainder = 2.0 * tail.total();
    Ok(MomentIdentity {
        direct,
        via_autocovariance: via,
        relative_gap: (direct - via).abs() / direct.abs().max(f64::MIN_POSITIVE),
        tail_remainder: remainder,
    })
}

/// Upper bounds `alpha_t <= 3 mu^2 sum_{n>=t} |rho_{n+1} - rho_n|
///  + 4 mu^2 sum_{n>=t} n |rho_{n+1} - 2 rho_n + rho_{n-1}|` for
/// `t = 1..=max_lag`.
///
/// The inner tail sums are truncated at the covariance horizon; the call
/// fails with [`Error::HorizonInsufficient`] when the last decade of the
/// horizon still contributes more than `convergence_tol` of their total.
pub fn alpha_mixing_bound(
    w: &WaitingTimeDistribution,
    cov: &CovarianceSequence,
    max_lag: usize,
    convergence_tol: f64,
) -> Result<MixingBoundSequence> {
    assert!(max_lag >= 1);
    let h = cov.horizon();
    if h < max_lag + 2 {
        return Err(Error::HorizonInsufficient {
            horizon: h,
            detail: format!("need horizon > {} for max lag {max_lag}", max_lag + 2),
        });
    }
    let mu_sq = w.mean() * w.mean();
    let rho = cov.autocovariances();

    // Term tables for n = 1..=h-1.
    let d1: Vec<f64> = (1..h).map(|n| (rho[n + 1] - rho[n]).abs()).collect();
    let d2: Vec<f64> = (1..h)
        .map(|n| n as f64 * (rho[n + 1] - 2.0 * rho[n] + rho[n - 1]).abs())
        .collect();

    // Convergence of the tails: the last decade of available terms must be
    // negligible against the full sums.
    let total: f64 = compensated_sum(d1.iter().chain(d2.iter()).copied());
    let cut = ((h - 1) / 10).max(max_lag);
    let late: f64 = compensated_sum(
        d1[cut.min(d1.len())..]
            .iter()
            .chain(d2[cut.min(d2.len())..].iter())
            .copied(),
    );
    if total > 0.0 && late > convergence_tol * total {
        return Err(Error::HorizonInsufficient {
            horizon: h,
            detail: format!(
                "tail sums not converged: last decade carries {:.3e} of the total",
                late / total
            ),
        });
    }

    // Suffix sums, smallest terms first.
    let mut s1 = vec![0.0; d1.len() + 1];
    let mut s2 = vec![0.0; d2.len() + 1];
    for n in (0..d1.len()).rev() {
        s1[n] = s1[n + 1] + d1[n];
        s2[n] = s2[n + 1] + d2[n];
    }

    let bounds: Vec<f64> = (1..=max_lag)
        .map(|t| 3.0 * mu_sq * s1[t - 1] + 4.0 * mu_sq * s2[t - 1])
        .collect();
    let mut partial = Neumaier::new();
    let partial_sums = bounds
        .iter()
        .map(|&b| {
            partial.add(b);
            partial.total()
        })
        .collect();
    Ok(MixingBoundSequence {
        bounds,
        partial_sums,
    })
}

/// Standardize replicate empirical means: `(mean - truth) * sqrt(t / v)`.
pub fn standardized_deviations(
    means: &[f64],
    variance: f64,
    true_value: f64,
    sample_len: usize,
) -> Result<Vec<f64>> {
    if !(variance > 0.0) {
        return Err(Error::DegenerateVariance);
    }
    let scale = (sample_len as f64 / variance).sqrt();
    Ok(means.iter().map(|&m| (m - true_value) * scale).collect())
}

/// General-observable cross covariance
/// `C_{i,j}(t) = sum_{u=1}^{i} sum_{v=1}^{j} p(i-u) rho_{u+t+v-2} p(j-v)`
/// with the convention `p(0) = -1`.
pub fn cross_covariance(
    w: &WaitingTimeDistribution,
    cov: &CovarianceSequence,
    i: usize,
    j: usize,
    t: usize,
) -> Result<f64> {
    assert!(i >= 1 && j >= 1 && t >= 1);
    let needed = i + t + j - 2;
    if cov.horizon() < needed {
        return Err(Error::HorizonInsufficient {
            horizon: cov.horizon(),
            detail: format!("C_{{{i},{j}}}({t}) needs autocovariance up to lag {needed}"),
        });
    }
    let coeff = |k: usize| if k == 0 { -1.0 } else { w.density(k) };
    let mut acc = Neumaier::new();
    for u in 1..=i {
        for v in 1..=j {
            acc.add(coeff(i - u) * cov.autocovariance(u + t + v - 2) * coeff(j - v));
        }
    }
    Ok(acc.total())
}
