//! Inverse problem: prescribed covariance to waiting-time law.
//!
//! A positive sequence with `c_{t-1} c_{t+1} >= c_t^2` (a Kaluza sequence)
//! whose limit is `c_0^2` is the pair-probability sequence of exactly one
//! stationary renewal binary model, with mean waiting time `1/c_0`. The
//! inversion unrolls the renewal convolution: `p(1) = c_1/c_0` and
//! `p(t+1) = c_{t+1}/c_0 - sum_{s=1}^{t} p(s) c_{t-s+1}/c_0`.
//!
//! Evaluating that recursion literally subtracts O(`c_0`) quantities to
//! extract a density that decays to the round-off floor, so we run its
//! exact conjugate instead: with `mu = 1/c_0` the tail solves
//!
//! ```text
//! Q(0) = 1,    Q(t) = -mu * sum_{s=0}^{t-1} Q(s) * (rho_{t-s} - rho_{t-s-1})
//! ```
//!
//! (the reciprocal power series of `sum_t Q(t) z^t`), in which every term
//! is of the order of the result. The density follows by differencing.
//! Both routes define the same `p` exactly; the conjugate form keeps full
//! relative precision down to tail values near the underflow threshold, at
//! the price of requiring `rho` itself at relative precision - which is why
//! [`CovarianceSequence`] stores `rho` as its own table.

use crate::dist::{TailFamily, WaitingTimeDistribution, TABLE_CAP};
use crate::error::{Error, Result};
use crate::renewal::CovarianceSequence;
use crate::sum::{compensated_sum, Neumaier};

/// Default horizon for covariance inversion; the recursion is O(T^2).
pub const DEFAULT_INVERSION_HORIZON: usize = 20_000;

/// Default clip tolerance, relative to `c_0`, separating rounding noise
/// from genuine non-renewability.
pub const DEFAULT_CLIP_TOL: f64 = 1e-10;

/// Mass that may remain unassigned at the horizon before the inversion is
/// rejected as too short.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Concave exponent function for prescribed autocovariances
/// `rho_t = m * exp(-phi(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PhiKind {
    /// `phi(t) = gamma * ln(1 + t)`: polynomial covariance decay
    /// `rho_t = m (1+t)^-gamma`.
    PowerLog { gamma: f64 },
    /// `phi(t) = kappa * t^beta` with `beta` in `(0, 1]`:
    /// stretched-exponential (or plain exponential) covariance decay.
    StretchedExp { beta: f64, kappa: f64 },
}

impl PhiKind {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            PhiKind::PowerLog { gamma } => gamma * (1.0 + t).ln(),
            PhiKind::StretchedExp { beta, kappa } => kappa * t.powf(beta),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PhiKind::PowerLog { gamma } if gamma > 0.0 && gamma.is_finite() => Ok(()),
            PhiKind::PowerLog { gamma } => Err(Error::SpecViolation {
                reason: format!("power-log exponent must be positive, got {gamma}"),
            }),
            PhiKind::StretchedExp { beta, kappa } => {
                if !(beta > 0.0 && beta <= 1.0) {
                    Err(Error::SpecViolation {
                        reason: format!("stretching exponent must lie in (0, 1], got {beta}"),
                    })
                } else if !(kappa > 0.0) || !kappa.is_finite() {
                    Err(Error::SpecViolation {
                        reason: format!("stretching scale must be positive, got {kappa}"),
                    })
                } else {
                    Ok(())
                }
            }
        }
    }
}

/// Prescription `E[X_1] = xi`, `rho_t = m * exp(-phi(t))` for `t >= 1`.
///
/// Any `xi` in `(0, 1]`, amplitude `m` in `[0, xi(1-xi)]`, and concave
/// `phi` with `phi(0) = 0` growing to infinity yields a Kaluza sequence,
/// hence an exactly representable covariance structure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceSpec {
    xi: f64,
    m: f64,
    phi: PhiKind,
}

impl CovarianceSpec {
    pub fn new(xi: f64, m: f64, phi: PhiKind) -> Result<Self> {
        if !(xi > 0.0 && xi <= 1.0) {
            return Err(Error::SpecViolation {
                reason: format!("target mean must lie in (0, 1], got {xi}"),
            });
        }
        let cap = xi * (1.0 - xi);
        if !(m >= 0.0) || m > cap * (1.0 + 1e-12) + 1e-300 {
            return Err(Error::SpecViolation {
                reason: format!("amplitude {m} outside [0, {cap}]"),
            });
        }
        phi.validate()?;
        Ok(Self { xi, m, phi })
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn amplitude(&self) -> f64 {
        self.m
    }

    pub fn phi(&self) -> PhiKind {
        self.phi
    }

    /// Exact autocovariance `rho_t` of the prescription.
    pub fn autocovariance(&self, t: usize) -> f64 {
        if t == 0 {
            self.xi * (1.0 - self.xi)
        } else {
            self.m * (-self.phi.value(t as f64)).exp()
        }
    }
}

/// Tabulate `c_0 = xi`, `c_t = xi^2 + m * exp(-phi(t))` up to `horizon`.
///
/// The `rho` table is filled from the closed form rather than by
/// subtraction, so it keeps relative precision long after `c_t` has
/// flattened onto `xi^2`. Concavity of `phi` is checked on the grid and
/// the result is guaranteed to pass [`kaluza_check`].
pub fn covariance_from_spec(spec: &CovarianceSpec, horizon: usize) -> Result<CovarianceSequence> {
    let xi = spec.xi;
    let sq = xi * xi;
    let mut c = Vec::with_capacity(horizon + 1);
    let mut rho = Vec::with_capacity(horizon + 1);
    c.push(xi);
    rho.push(xi - sq);
    let mut prev_phi = 0.0;
    let mut prev_diff = f64::INFINITY;
    for t in 1..=horizon {
        let phi = spec.phi.value(t as f64);
        let diff = phi - prev_phi;
        // Concavity on the grid: increments must not grow.
        if diff > prev_diff + 1e-12 {
            return Err(Error::SpecViolation {
                reason: format!("phi is not concave on the grid at t = {t}"),
            });
        }
        if phi < prev_phi {
            return Err(Error::SpecViolation {
                reason: format!("phi decreases at t = {t}"),
            });
        }
        let r = spec.m * (-phi).exp();
        rho.push(r);
        c.push(sq + r);
        prev_diff = diff;
        prev_phi = phi;
    }
    let seq = CovarianceSequence::from_parts(c, rho);
    let report = kaluza_check(&seq, 1e-12)?;
    if !report.is_kaluza {
        return Err(Error::SpecViolation {
            reason: format!(
                "spec produced a non-Kaluza sequence at t = {}",
                report.first_violation.unwrap_or(0)
            ),
        });
    }
    Ok(seq)
}

/// Outcome of a Kaluza log-convexity scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KaluzaReport {
    pub is_kaluza: bool,
    /// First lag `t` with `c_{t-1} c_{t+1} < c_t^2 - tol`, if any.
    pub first_violation: Option<usize>,
}

/// Check `c_{t-1} c_{t+1} >= c_t^2 - tol` for `1 <= t <= horizon - 1`.
///
/// Fails with [`Error::NonPositiveEntry`] if any entry is not strictly
/// positive; Kaluza sequences are positive by definition.
pub fn kaluza_check(c: &CovarianceSequence, tol: f64) -> Result<KaluzaReport> {
    let values = c.pair_probabilities();
    for (i, &v) in values.iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonPositiveEntry { index: i, value: v });
        }
    }
    for t in 1..values.len().saturating_sub(1) {
        if values[t - 1] * values[t + 1] < values[t] * values[t] - tol {
            return Ok(KaluzaReport {
                is_kaluza: false,
                first_violation: Some(t),
            });
        }
    }
    Ok(KaluzaReport {
        is_kaluza: true,
        first_violation: None,
    })
}

/// Result of a covariance inversion.
#[derive(Debug, Clone)]
pub struct InversionResult {
    pub distribution: WaitingTimeDistribution,
    /// Total negative rounding mass clipped to zero.
    pub clipped_mass: f64,
    /// Recursion horizon actually used.
    pub horizon: usize,
    /// `|mean - 1/c_0|`: how well the inverted law meets its target mean.
    pub mean_gap: f64,
    /// Lag from which the tail was extended geometrically, if it was.
    pub extrapolated_from: Option<usize>,
    /// First Kaluza violation in the input, when the check was downgraded
    /// to a warning.
    pub kaluza_violation: Option<usize>,
}

/// Invert a prescribed covariance sequence into its waiting-time law.
///
/// Density values in `[-clip_tol * c_0, 0)` are treated as rounding noise
/// and clipped to zero; anything more negative aborts with
/// [`Error::NotRenewable`]. If mass `> MASS_TOLERANCE` remains beyond the
/// horizon the tail is extended geometrically when the last decade of
/// `log Q` is numerically linear, otherwise the inversion fails with
/// [`Error::HorizonTooShort`] and a longer input sequence is needed.
pub fn invert_autocovariance(c: &CovarianceSequence, clip_tol: f64) -> Result<InversionResult> {
    let horizon = c.horizon();
    let c0 = c.pair_probability(0);
    for (i, &v) in c.pair_probabilities().iter().enumerate() {
        if !(v > 0.0) {
            return Err(Error::NonPositiveEntry { index: i, value: v });
        }
    }
    let kaluza_violation = kaluza_check(c, 1e-12)?.first_violation;

    let mu = 1.0 / c0;
    let rho = c.autocovariances();
    // delta[k] = rho_k - rho_{k-1}, k >= 1
    let delta: Vec<f64> = (1..=horizon).map(|k| rho[k] - rho[k - 1]).collect();

    // Tail recursion at relative precision (see module docs).
    let mut q = Vec::with_capacity(horizon + 1);
    q.push(1.0f64);
    for t in 1..=horizon {
        let mut acc = Neumaier::new();
        for s in 0..t {
            acc.add(q[s] * delta[t - s - 1]);
        }
        q.push(-mu * acc.total());
    }

    // Density by differencing, with clipping of rounding-level negatives.
    // `offset` keeps the reported tail consistent with the clipped density.
    let clip_floor = clip_tol * c0;
    let mut density = Vec::with_capacity(horizon);
    let mut tail_out = Vec::with_capacity(horizon + 1);
    tail_out.push(1.0);
    let mut clipped = 0.0;
    let mut offset = 0.0;
    for t in 1..=horizon {
        let p = q[t - 1] - q[t];
        if p < -clip_floor {
            return Err(Error::NotRenewable { index: t, value: p });
        }
        if p < 0.0 {
            clipped += -p;
            offset += -p;
            density.push(0.0);
        } else {
            density.push(p);
        }
        // A genuinely negative tail means the density mass already exceeds
        // one: no renewal representation either.
        let qt = q[t] + offset;
        if qt < -clip_floor {
            return Err(Error::NotRenewable { index: t, value: qt });
        }
        tail_out.push(qt.max(0.0));
    }

    let mut assigned = compensated_sum(density.iter().copied());
    let mut extrapolated_from = None;

    if assigned < 1.0 - MASS_TOLERANCE {
        match geometric_tail_ratio(&tail_out, horizon) {
            Some(ratio) => {
                extrapolated_from = Some(horizon);
                let mut qv = tail_out[horizon];
                while qv > 0.0 && density.len() < TABLE_CAP {
                    let next = qv * ratio;
                    density.push(qv - next);
                    tail_out.push(next);
                    qv = next;
                }
                assigned = compensated_sum(density.iter().copied());
                if assigned < 1.0 - MASS_TOLERANCE {
                    return Err(Error::HorizonTooShort {
                        horizon,
                        missing: 1.0 - assigned,
                    });
                }
            }
            None => {
                return Err(Error::HorizonTooShort {
                    horizon,
                    missing: 1.0 - assigned,
                });
            }
        }
    }

    // Residual mass beyond the table would normally fold into the last bin,
    // which undercounts the mean by the unassigned tail area. The target
    // mean is known (sum_s s p(s) = 1/c_0), so spread the residual over the
    // two adjacent bins that reproduce it exactly.
    let residual = tail_out[density.len()];
    if residual > 1e-300 {
        let len = density.len();
        let folded_mean = compensated_sum(
            density
                .iter()
                .enumerate()
                .map(|(i, &p)| (i + 1) as f64 * p),
        ) + len as f64 * residual;
        let deficit = mu - folded_mean;
        let shift = deficit / residual;
        // Below ~100 ulps of mu the deficit is pure rounding noise and the
        // plain fold is already exact enough; placing mass on noise would
        // distort the tail.
        if deficit > 1e-13 * mu && shift > 0.0 && shift.is_finite() {
            let whole = (shift.floor() as usize).min(TABLE_CAP.saturating_sub(len + 1));
            let frac = (shift - shift.floor()).clamp(0.0, 1.0);
            let low_bin = len + whole;
            density.extend(std::iter::repeat_n(0.0, whole));
            tail_out.extend(std::iter::repeat_n(residual, whole));
            density[low_bin - 1] += (1.0 - frac) * residual;
            tail_out[low_bin] = frac * residual;
            density.push(frac * residual);
            tail_out.push(0.0);
        }
    }

    // Joint rescale keeps the differencing identity exact; skipped when the
    // defect is at rounding level.
    let total =
        compensated_sum(density.iter().copied()) + tail_out[density.len()];
    if (total - 1.0).abs() > 1e-13 {
        let inv = 1.0 / total;
        for v in &mut density {
            *v *= inv;
        }
        for v in tail_out.iter_mut().skip(1) {
            *v *= inv;
        }
    }

    let distribution =
        WaitingTimeDistribution::from_parts(density, tail_out, true, TailFamily::Inverted)?;
    let mean_gap = (distribution.mean() - mu).abs();
    Ok(InversionResult {
        distribution,
        clipped_mass: clipped,
        horizon,
        mean_gap,
        extrapolated_from,
        kaluza_violation,
    })
}

/// Common ratio of the tail over its last decade, when the decade is
/// numerically geometric (log-linear within 1e-6 relative spread).
fn geometric_tail_ratio(tail: &[f64], horizon: usize) -> Option<f64> {
    const SPREAD_TOL: f64 = 1e-6;
    let hi = horizon;
    let lo = (horizon / 10).max(1);
    if hi <= lo + 10 {
        return None;
    }
    let mut min_r = f64::INFINITY;
    let mut max_r = f64::NEG_INFINITY;
    let mut count = 0usize;
    for t in lo + 1..=hi {
        let prev = tail[t - 1];
        let cur = tail[t];
        if prev < 1e-300 || cur <= 0.0 {
            break;
        }
        let r = cur / prev;
        min_r = min_r.min(r);
        max_r = max_r.max(r);
        count += 1;
    }
    if count < 10 {
        return None;
    }
    let mid = 0.5 * (min_r + max_r);
    if mid >= 1.0 || max_r - min_r > SPREAD_TOL * mid {
        return None;
    }
    Some(mid)
}
