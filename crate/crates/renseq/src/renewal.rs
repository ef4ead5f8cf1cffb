//! Direct problem: waiting-time law to pair probabilities and
//! autocovariance.
//!
//! With `c_t = P[X_1 = 1, X_{t+1} = 1]` the renewal structure gives the
//! convolution recursion `c_t = sum_{s=1}^{t} p(s) c_{t-s}` with
//! `c_0 = 1/mu`, and the autocovariance is `rho_t = c_t - c_0^2`. For an
//! aperiodic waiting-time law the renewal theorem drives `c_t` to `1/mu^2`,
//! i.e. `rho_t` to zero; when the tail is subexponential the decay obeys
//! `rho_t ~ (1/mu^3) * sum_{n > t} Q(n)`, which [`tail_proxy`] tabulates as
//! a comparator.

use crate::dist::{TailFamily, WaitingTimeDistribution};
use crate::error::{Error, Result};
use crate::sum::Neumaier;

/// Pair probabilities `c_t` and autocovariances `rho_t` on `t = 0..=horizon`.
#[derive(Debug, Clone)]
pub struct CovarianceSequence {
    c: Vec<f64>,
    rho: Vec<f64>,
}

impl CovarianceSequence {
    /// Wrap a raw `c_t` table; `rho` is derived as `c_t - c_0^2`.
    ///
    /// Note the derived autocovariance carries an absolute floor of about
    /// one ulp of `c_0^2`; constructors that know `rho` in closed form use
    /// [`CovarianceSequence::from_parts`] instead.
    pub fn from_pair_probabilities(c: Vec<f64>) -> Self {
        assert!(!c.is_empty());
        let sq = c[0] * c[0];
        let rho = c.iter().map(|&v| v - sq).collect();
        Self { c, rho }
    }

    /// Wrap matching `c_t` and `rho_t` tables.
    pub fn from_parts(c: Vec<f64>, rho: Vec<f64>) -> Self {
        assert_eq!(c.len(), rho.len());
        assert!(!c.is_empty());
        Self { c, rho }
    }

    /// `c_t = P[X_1 = 1, X_{t+1} = 1]`.
    #[inline]
    pub fn pair_probability(&self, t: usize) -> f64 {
        self.c[t]
    }

    /// `rho_t = cov[X_1, X_{t+1}]`.
    #[inline]
    pub fn autocovariance(&self, t: usize) -> f64 {
        self.rho[t]
    }

    /// Largest tabulated lag.
    pub fn horizon(&self) -> usize {
        self.c.len() - 1
    }

    pub fn pair_probabilities(&self) -> &[f64] {
        &self.c
    }

    pub fn autocovariances(&self) -> &[f64] {
        &self.rho
    }
}

/// Solve the renewal recursion forward to the requested horizon.
///
/// Substituting `c = c_0^2 + rho` into the convolution gives the exact
/// conjugate `rho_t = sum_{s=1}^{t} p(s) rho_{t-s} - c_0^2 Q(t)`, whose
/// terms are all of the order of the result; running it instead of the
/// plain recursion keeps `rho` at relative precision long after `c_t` has
/// flattened onto `c_0^2` (the plain form floors `rho` at one ulp of
/// `c_0^2`). `c` is recovered as `c_0^2 + rho_t`.
pub fn solve_renewal(w: &WaitingTimeDistribution, horizon: usize) -> CovarianceSequence {
    let c0 = 1.0 / w.mean();
    let sq = c0 * c0;
    let mut rho = Vec::with_capacity(horizon + 1);
    rho.push(c0 - sq);
    let support = w.support_max();
    for t in 1..=horizon {
        let mut acc = Neumaier::new();
        for s in 1..=t.min(support) {
            acc.add(w.density(s) * rho[t - s]);
        }
        acc.add(-sq * w.tail(t));
        rho.push(acc.total());
    }
    let c = rho.iter().map(|&r| sq + r).collect();
    CovarianceSequence::from_parts(c, rho)
}

/// The subexponential comparator `(1/mu^3) * sum_{n > t} Q(n)` on
/// `t = 0..=horizon`.
#[derive(Debug, Clone)]
pub struct TailProxySequence {
    values: Vec<f64>,
}

impl TailProxySequence {
    #[inline]
    pub fn value(&self, t: usize) -> f64 {
        self.values[t]
    }

    pub fn horizon(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Tabulate `(1/mu^3) * sum_{n > t} Q(n)` from the cached tail suffix sums;
/// entries are non-negative and non-increasing by construction.
pub fn tail_proxy(w: &WaitingTimeDistribution, horizon: usize) -> TailProxySequence {
    let inv_mu3 = 1.0 / (w.mean() * w.mean() * w.mean());
    let values = (0..=horizon).map(|t| inv_mu3 * w.tail_sum(t + 1)).collect();
    TailProxySequence { values }
}

/// Leading-order autocovariance prediction for the built-in tail families.
///
/// Polynomial tails decay as `scale / (gamma * mu^3 * t^gamma)`;
/// stretched-exponential tails with `beta < 1` as
/// `t^(1-beta) / (mu^3 * beta * kappa) * exp(-kappa * t^beta)`. No formula
/// is provided for table, Markov, inverted, or `beta = 1` models.
///
/// # Panics
/// Panics if `t == 0`; the expansions are for positive lags.
pub fn asymptotic_autocovariance(w: &WaitingTimeDistribution, t: usize) -> Result<f64> {
    assert!(t >= 1, "asymptotic comparator needs t >= 1");
    let mu3 = w.mean() * w.mean() * w.mean();
    let tf = t as f64;
    match w.family() {
        TailFamily::Polynomial { gamma, scale } => Ok(scale / (gamma * mu3 * tf.powf(gamma))),
        TailFamily::Stretched { beta, kappa } if beta < 1.0 => {
            Ok(tf.powf(1.0 - beta) / (mu3 * beta * kappa) * (-(kappa * tf.powf(beta))).exp())
        }
        _ => Err(Error::UnsupportedFamily),
    }
}

/// Smallest order `M` for which the density has a geometric tail beyond
/// `p(M+1)` within relative tolerance `tol`, i.e. for which the binary
/// chain is Markov of order `M`. Returns `None` when no order up to the
/// scan cap certifies.
pub fn markov_order(w: &WaitingTimeDistribution, tol: f64) -> Option<usize> {
    const ORDER_CAP: usize = 64;
    let n = w.support_max();
    // The last bin carries folded residual mass, so ratios ending there are
    // excluded from the scan.
    let usable = if w.residual_mass() > 0.0 { n.saturating_sub(1) } else { n };
    for order in 0..=ORDER_CAP.min(n.saturating_sub(1)) {
        let head_end = order + 1; // p(order+1) is the first tail value
        let base = w.density(head_end);
        if base == 0.0 {
            // Finite support: geometric with lambda = 0 iff nothing follows.
            if (head_end + 1..=n).all(|s| w.density(s) == 0.0) {
                return Some(order);
            }
            continue;
        }
        if head_end == n {
            // Support ends exactly at the head: lambda = 0.
            return Some(order);
        }
        if head_end + 2 > usable {
            // Not enough points beyond the head to certify a ratio.
            return None;
        }
        let lambda = w.density(head_end + 1) / base;
        if !(0.0..1.0).contains(&lambda) {
            continue;
        }
        // Ratios below this floor sit in or near the subnormal range where
        // the stored densities no longer carry full mantissas.
        const RATIO_FLOOR: f64 = 1e-280;
        let consistent = (head_end + 1..=usable).all(|s| {
            let prev = w.density(s - 1);
            if prev == 0.0 {
                return w.density(s) == 0.0;
            }
            if prev < RATIO_FLOOR {
                return true;
            }
            let r = w.density(s) / prev;
            (r - lambda).abs() <= tol * lambda.max(f64::MIN_POSITIVE)
        });
        if consistent {
            return Some(order);
        }
    }
    None
}
