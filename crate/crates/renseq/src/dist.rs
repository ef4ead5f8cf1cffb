//! Waiting-time distributions and the stationary delay law.
//!
//! A binary sequence is built by marking the renewal times of a
//! discrete-time renewal process with symbol 1. The single model input is
//! the distribution of the waiting time between consecutive renewals: a
//! density `p(s)` on `s = 1, 2, ...` with finite mean `mu`. The first
//! waiting time is drawn from the delay law `P[S1 = s] = Q(s-1)/mu`, where
//! `Q(t) = P[S > t]` is the tail; that choice (and only that choice) makes
//! the binary sequence stationary.
//!
//! Distributions are stored as finite tables. Analytic tail families keep
//! the closed-form tail and difference it, so `Q(t-1) - Q(t) = p(t)` holds
//! to machine precision; any residual mass beyond the table is folded into
//! the last bin, keeping the density an exact probability vector.

use crate::error::{Error, Result};
use crate::sum::{compensated_sum, Neumaier};

/// Hard cap on table length (one entry per time step).
pub const TABLE_CAP: usize = 1_000_000;

/// Default residual tail mass at which tables are truncated.
///
/// Zero means "run until the tail underflows or [`TABLE_CAP`] is hit":
/// built-in families then satisfy closed-form identities (moments, delay
/// law) to full f64 precision. Pass a positive value to
/// [`WaitingTimeDistribution::from_density`] to trade accuracy for memory.
pub const DEFAULT_EPS_TAIL: f64 = 0.0;

/// Which constructor produced a distribution; drives the asymptotic
/// comparators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailFamily {
    /// User-supplied density table.
    Table,
    /// Geometric tail after a finite head: `p(M+1+s) = lambda^s p(M+1)`.
    /// The generated binary chain is Markov of order `M`.
    Markov { order: usize, lambda: f64 },
    /// Polynomial tail `Q(t) = scale * (1+t)^-(gamma+1)`.
    Polynomial { gamma: f64, scale: f64 },
    /// Stretched-exponential tail `Q(t) = exp(-kappa * t^beta)`.
    Stretched { beta: f64, kappa: f64 },
    /// Result of inverting a prescribed covariance sequence.
    Inverted,
}

/// Distribution of the waiting time between consecutive renewals.
#[derive(Debug, Clone)]
pub struct WaitingTimeDistribution {
    /// `density[i] = P[S = i+1]`.
    density: Vec<f64>,
    /// `tail[t] = P[S > t]` for `t = 0..=support_max`; last entry is 0.
    tail: Vec<f64>,
    /// `tail_sum[t] = sum_{u >= t} tail[u]`; `tail_sum[0]` equals the mean.
    tail_sum: Vec<f64>,
    mean: f64,
    second_moment: Option<f64>,
    residual: f64,
    aperiodic: bool,
    family: TailFamily,
}

/// Stationary delay law for the first waiting time.
#[derive(Debug, Clone)]
pub struct DelayDistribution {
    density: Vec<f64>,
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn validate_table(table: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(table.len());
    for (i, &v) in table.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::NonFiniteMass { index: i });
        }
        if v < -1e-12 {
            return Err(Error::NegativeMass { index: i, mass: v });
        }
        out.push(v.max(0.0));
    }
    Ok(out)
}

impl WaitingTimeDistribution {
    /// Build from an explicit density table over `s = 1..=table.len()`.
    ///
    /// Entries are validated, normalized, and the table is truncated at the
    /// first point where the remaining tail mass is at most `eps_tail`; the
    /// residual is folded into the last kept bin so the density sums to one
    /// exactly. The folded mass biases the mean by at most
    /// `eps_tail * support_max`.
    pub fn from_density(table: &[f64], eps_tail: f64) -> Result<Self> {
        let mut p = validate_table(table)?;
        let total = compensated_sum(p.iter().copied());
        if total <= 0.0 {
            return Err(Error::ZeroDistribution);
        }
        if total > 1.0 + 1e-9 {
            return Err(Error::MassExceedsOne { total });
        }
        for v in &mut p {
            *v /= total;
        }

        // Smallest keep with suffix mass <= eps_tail, subject to the cap.
        let mut suffix = vec![0.0; p.len() + 1];
        for i in (0..p.len()).rev() {
            suffix[i] = suffix[i + 1] + p[i];
        }
        let mut keep = p.len();
        while keep > 1 && suffix[keep - 1] <= eps_tail {
            keep -= 1;
        }
        keep = keep.min(TABLE_CAP);
        let residual = suffix[keep];
        p.truncate(keep);
        p[keep - 1] += residual;

        // Tail by exact downward differencing of the folded density.
        let mut tail = Vec::with_capacity(keep + 1);
        tail.push(1.0);
        for (i, &mass) in p.iter().enumerate() {
            let q = (tail[i] - mass).max(0.0);
            tail.push(q);
        }
        tail[keep] = 0.0;

        Self::finish(p, tail, residual, true, TailFamily::Table)
    }

    /// Geometric head-plus-tail family: `p(1..=M+1)` given by `head`, then
    /// `p(M+1+s) = lambda^s * head[M]`. The associated binary chain is a
    /// Markov chain of order `M = head.len() - 1`; `M = 0` gives an i.i.d.
    /// sequence.
    pub fn markov_family(head: &[f64], lambda: f64) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::ZeroDistribution);
        }
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::InvalidLambda { lambda });
        }
        let mut head = validate_table(head)?;
        let order = head.len() - 1;
        let head_mass = compensated_sum(head[..order].iter().copied());
        let implied = head_mass + head[order] / (1.0 - lambda);
        if (implied - 1.0).abs() > 1e-9 {
            return Err(Error::MassMismatch { total: implied });
        }
        if implied != 1.0 {
            for v in &mut head {
                *v /= implied;
            }
        }

        let mut density = head.clone();
        let mut tail = Vec::with_capacity(density.len() + 1);
        tail.push(1.0);
        for (i, &mass) in head[..order].iter().enumerate() {
            tail.push((tail[i] - mass).max(0.0));
        }
        // Closed-form geometric tail: Q(M + j) = head[M] * lambda^j / (1 - lambda).
        let base = head[order] / (1.0 - lambda);
        tail.push(base * lambda);
        if lambda > 0.0 {
            let mut mass = head[order] * lambda;
            let mut q = base * lambda * lambda;
            while mass > 0.0 && density.len() < TABLE_CAP {
                density.push(mass);
                tail.push(q);
                mass *= lambda;
                q *= lambda;
            }
        }
        let residual = tail[density.len()];
        let last = density.len() - 1;
        density[last] += residual;
        tail[density.len()] = 0.0;
        tail.truncate(density.len() + 1);

        Self::finish(density, tail, residual, true, TailFamily::Markov { order, lambda })
    }

    /// Maximum-entropy (geometric) distribution with the given mean:
    /// `p(s) = mu^-s * (mu-1)^(s-1)`. `mu = 1` degenerates to the
    /// deterministic unit waiting time.
    pub fn geometric(mu: f64) -> Result<Self> {
        if !(mu >= 1.0) || !mu.is_finite() {
            return Err(Error::InvalidMean { mu });
        }
        if mu == 1.0 {
            Self::markov_family(&[1.0], 0.0)
        } else {
            Self::markov_family(&[1.0 / mu], 1.0 - 1.0 / mu)
        }
    }

    /// Polynomial tail `Q(t) = min(1, scale * (1+t)^-(gamma+1))` for
    /// `t >= 1`, densified by differencing. The mean is finite for every
    /// `gamma > 0`; the second moment is flagged infinite for `gamma <= 1`.
    pub fn polynomial_tail(gamma: f64, scale: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidExponent { value: gamma });
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidScale { value: scale });
        }
        let q1 = scale * 2f64.powf(-(gamma + 1.0));
        if q1 > 1.0 {
            return Err(Error::TailExceedsOne { value: q1 });
        }

        let mut density = Vec::new();
        let mut tail = vec![1.0];
        for t in 1..=TABLE_CAP {
            let q = (scale * ((1 + t) as f64).powf(-(gamma + 1.0))).min(1.0);
            density.push(tail[t - 1] - q);
            tail.push(q);
            if q <= 0.0 {
                break;
            }
        }
        let residual = *tail.last().unwrap();
        *density.last_mut().unwrap() += residual;
        *tail.last_mut().unwrap() = 0.0;

        Self::finish(
            density,
            tail,
            residual,
            gamma > 1.0,
            TailFamily::Polynomial { gamma, scale },
        )
    }

    /// Stretched-exponential tail `Q(t) = exp(-kappa * t^beta)` with
    /// stretching exponent `beta` in `(0, 1]`; `beta = 1` is the plain
    /// exponential boundary case.
    pub fn stretched_exp_tail(beta: f64, kappa: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::InvalidExponent { value: beta });
        }
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidScale { value: kappa });
        }

        let mut density = Vec::new();
        let mut tail = vec![1.0];
        for t in 1..=TABLE_CAP {
            let q = (-(kappa * (t as f64).powf(beta))).exp();
            density.push(tail[t - 1] - q);
            tail.push(q);
            if q <= 0.0 {
                break;
            }
        }
        let residual = *tail.last().unwrap();
        *density.last_mut().unwrap() += residual;
        *tail.last_mut().unwrap() = 0.0;

        Self::finish(
            density,
            tail,
            residual,
            true,
            TailFamily::Stretched { beta, kappa },
        )
    }

    /// Assemble from a density and a matching tail table.
    ///
    /// `tail` must have one more entry than `density` with `tail[0] = 1`;
    /// the last tail entry is folded into the final density bin. Used by
    /// the covariance inverter, which produces both tables with full
    /// relative precision.
    pub(crate) fn from_parts(
        mut density: Vec<f64>,
        mut tail: Vec<f64>,
        second_moment_finite: bool,
        family: TailFamily,
    ) -> Result<Self> {
        assert_eq!(tail.len(), density.len() + 1);
        let residual = *tail.last().unwrap();
        *density.last_mut().unwrap() += residual;
        *tail.last_mut().unwrap() = 0.0;
        Self::finish(density, tail, residual, second_moment_finite, family)
    }

    fn finish(
        density: Vec<f64>,
        tail: Vec<f64>,
        residual: f64,
        second_moment_finite: bool,
        family: TailFamily,
    ) -> Result<Self> {
        debug_assert_eq!(tail.len(), density.len() + 1);

        // Suffix sums of the tail, accumulated smallest-first so the cache
        // is non-increasing and non-negative by construction.
        let mut tail_sum = vec![0.0; tail.len()];
        for t in (0..tail.len() - 1).rev() {
            tail_sum[t] = tail_sum[t + 1] + tail[t];
        }

        let mut mean_acc = Neumaier::new();
        let mut m2_acc = Neumaier::new();
        for (i, &p) in density.iter().enumerate() {
            let s = (i + 1) as f64;
            mean_acc.add(s * p);
            m2_acc.add(s * s * p);
        }
        let mean = mean_acc.total();
        if !mean.is_finite() || mean <= 0.0 {
            return Err(Error::InfiniteMean);
        }
        let second_moment = second_moment_finite.then(|| m2_acc.total());

        let mut g = 0usize;
        for (i, &p) in density.iter().enumerate() {
            if p > 0.0 {
                g = gcd(g, i + 1);
                if g == 1 {
                    break;
                }
            }
        }
        let aperiodic = g == 1;

        Ok(Self {
            density,
            tail,
            tail_sum,
            mean,
            second_moment,
            residual,
            aperiodic,
            family,
        })
    }

    /// `P[S = s]`; zero outside the table.
    #[inline]
    pub fn density(&self, s: usize) -> f64 {
        if s == 0 || s > self.density.len() {
            0.0
        } else {
            self.density[s - 1]
        }
    }

    /// `P[S > t]`; zero at and beyond the table end.
    #[inline]
    pub fn tail(&self, t: usize) -> f64 {
        if t >= self.tail.len() {
            0.0
        } else {
            self.tail[t]
        }
    }

    /// `sum_{u >= t} P[S > u]`; equals the mean at `t = 0`.
    #[inline]
    pub fn tail_sum(&self, t: usize) -> f64 {
        if t >= self.tail_sum.len() {
            0.0
        } else {
            self.tail_sum[t]
        }
    }

    /// Largest representable waiting time (table length).
    pub fn support_max(&self) -> usize {
        self.density.len()
    }

    /// Mean waiting time.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Second moment of the waiting time, `None` when flagged infinite.
    pub fn second_moment(&self) -> Option<f64> {
        self.second_moment
    }

    /// Tail mass folded into the last bin at construction.
    pub fn residual_mass(&self) -> f64 {
        self.residual
    }

    /// Whether the support has gcd 1. Renewal-theorem convergence of the
    /// pair probability to `1/mu^2` is only guaranteed when true.
    pub fn is_aperiodic(&self) -> bool {
        self.aperiodic
    }

    pub fn family(&self) -> TailFamily {
        self.family
    }

    /// Raw density table (`[0]` is `P[S = 1]`).
    pub fn density_table(&self) -> &[f64] {
        &self.density
    }

    /// Export the density as two-column CSV (`s,p`), with a header line.
    pub fn write_density_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "s,p")?;
        for (i, &p) in self.density.iter().enumerate() {
            writeln!(out, "{},{}", i + 1, p)?;
        }
        Ok(())
    }

    /// Stationary delay law `P[S1 = s] = Q(s-1)/mu`.
    pub fn stationary_delay(&self) -> DelayDistribution {
        let density = self
            .tail
            .iter()
            .take(self.density.len())
            .map(|&q| q / self.mean)
            .collect();
        DelayDistribution { density }
    }
}

impl DelayDistribution {
    /// `P[S1 = s]`; zero outside the table.
    #[inline]
    pub fn density(&self, s: usize) -> f64 {
        if s == 0 || s > self.density.len() {
            0.0
        } else {
            self.density[s - 1]
        }
    }

    pub fn support_max(&self) -> usize {
        self.density.len()
    }

    pub fn density_table(&self) -> &[f64] {
        &self.density
    }
}
