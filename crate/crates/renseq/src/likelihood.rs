//! Exact finite-dimensional probabilities, conditional laws, entropies,
//! and equipartition statistics.
//!
//! The probability of a pattern `x_1..x_t` factorizes over its renewal
//! structure: writing `i_1 < ... < i_N` for the positions of the ones,
//!
//! ```text
//! P[pattern] = (1/mu) * Q(i_1 - 1) * prod_n p(i_n - i_{n-1}) * Q(t - i_N)
//! ```
//!
//! and `(1/mu) * sum_{s >= t} Q(s)` for the all-zero pattern. Everything
//! here works in natural-log space and exponentiates only at the API
//! boundary, so likelihoods of 10^8-symbol sequences do not underflow.
//!
//! The next-symbol law depends on the past only through the distance `l`
//! back to the most recent 1 (the context length, unbounded in general):
//! `P[next = 1 | history] = p(l)/Q(l-1)`, or `Q(t)/sum_{s>=t} Q(s)` after
//! an all-zero history of length `t`.

use crate::dist::WaitingTimeDistribution;
use crate::error::{Error, Result};
use crate::seq::BinarySequence;
use crate::sum::Neumaier;

/// Longest pattern for which the exponentiated probability is returned.
pub const EXACT_PATTERN_CAP: usize = 64;

/// Longest block length for exhaustive enumeration.
pub const ENUMERATION_CAP: usize = 20;

/// Log-probability of an observed prefix, with the equipartition statistic
/// `-(mu/t) * ln P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihood {
    /// Natural-log probability; at most 0.
    pub value: f64,
    /// `-(mu / len) * value`; converges to the waiting-time entropy.
    pub aep_statistic: f64,
}

/// Shannon entropies of a model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropySummary {
    /// Entropy of the waiting-time density, `-sum p(s) ln p(s)` (nats).
    pub waiting_entropy: f64,
    /// Entropy per symbol, `waiting_entropy / mean` (nats/step).
    pub entropy_rate: f64,
    /// Entropy of the block law at the requested length (nats).
    pub block_entropy: f64,
    pub block_len: usize,
}

/// Distance from the end of a history to its most recent 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextLength {
    Finite(usize),
    /// The history contains no 1.
    Infinite,
}

/// Exhaustive typical-set census at one block length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalSetSummary {
    /// Patterns whose equipartition statistic is within `epsilon` of the
    /// waiting-time entropy.
    pub count: u64,
    /// Their total probability mass.
    pub mass: f64,
    /// Number of patterns enumerated (`2^len`).
    pub total: u64,
}

enum LogProb {
    Value(f64),
    /// Pattern has probability zero; 1-based position of the violation and
    /// the offending gap length.
    Zero { position: usize, gap: usize },
}

/// Shared walker over the renewal factorization. `ones` yields the 1-based
/// positions of the ones in increasing order.
fn log_prob_from_ones<I: Iterator<Item = usize>>(
    w: &WaitingTimeDistribution,
    ones: I,
    len: usize,
) -> LogProb {
    // Compensated accumulation: a 10^8-symbol sequence sums ~10^8/mu log
    // terms, and plain addition would drift by ~n ulps.
    let mut acc = Neumaier::new();
    acc.add(-w.mean().ln());
    let mut prev: Option<usize> = None;
    for i in ones {
        let factor = match prev {
            None => w.tail(i - 1),
            Some(p) => w.density(i - p),
        };
        if factor <= 0.0 {
            return LogProb::Zero {
                position: i,
                gap: i - prev.unwrap_or(0),
            };
        }
        acc.add(factor.ln());
        prev = Some(i);
    }
    match prev {
        Some(last) => {
            let censored = w.tail(len - last);
            if censored <= 0.0 {
                return LogProb::Zero {
                    position: len,
                    gap: len - last,
                };
            }
            acc.add(censored.ln());
        }
        None => {
            let rest = w.tail_sum(len);
            if rest <= 0.0 {
                return LogProb::Zero {
                    position: len,
                    gap: len,
                };
            }
            acc.add(rest.ln());
        }
    }
    LogProb::Value(acc.total())
}

fn ones_of_pattern(pattern: &[u8]) -> Result<Vec<usize>> {
    let mut ones = Vec::new();
    for (i, &x) in pattern.iter().enumerate() {
        match x {
            0 => {}
            1 => ones.push(i + 1),
            value => return Err(Error::InvalidSymbol { position: i, value }),
        }
    }
    Ok(ones)
}

/// Exact probability of a short pattern (entries 0/1, length at most
/// [`EXACT_PATTERN_CAP`]). Patterns with impossible gaps get probability 0.
pub fn joint_probability(w: &WaitingTimeDistribution, pattern: &[u8]) -> Result<f64> {
    if pattern.is_empty() || pattern.len() > EXACT_PATTERN_CAP {
        return Err(Error::PatternTooLong {
            len: pattern.len(),
            cap: EXACT_PATTERN_CAP,
        });
    }
    let ones = ones_of_pattern(pattern)?;
    match log_prob_from_ones(w, ones.into_iter(), pattern.len()) {
        LogProb::Value(l) => Ok(l.exp()),
        LogProb::Zero { .. } => Ok(0.0),
    }
}

/// Streaming log-likelihood of a full sequence.
pub fn log_likelihood(w: &WaitingTimeDistribution, seq: &BinarySequence) -> Result<LogLikelihood> {
    assert!(!seq.is_empty(), "log-likelihood of an empty sequence");
    match log_prob_from_ones(w, seq.iter_ones().map(|p| p + 1), seq.len()) {
        LogProb::Value(value) => Ok(LogLikelihood {
            value,
            aep_statistic: -(w.mean() / seq.len() as f64) * value,
        }),
        LogProb::Zero { position, gap } => Err(Error::ZeroProbability { position, gap }),
    }
}

/// Context length of a history given in natural time order (most recent
/// symbol last).
pub fn context_length(history: &[u8]) -> ContextLength {
    for (back, &x) in history.iter().rev().enumerate() {
        if x != 0 {
            return ContextLength::Finite(back + 1);
        }
    }
    ContextLength::Infinite
}

/// `P[X_{t+1} = 1 | history]` for a history of length `t` in natural time
/// order. Fails with [`Error::ImpossibleHistory`] when the history has
/// probability zero under the model.
pub fn next_symbol_probability(w: &WaitingTimeDistribution, history: &[u8]) -> Result<f64> {
    let ones = ones_of_pattern(history)?;
    if let LogProb::Zero { position, .. } =
        log_prob_from_ones(w, ones.iter().copied(), history.len())
    {
        return Err(Error::ImpossibleHistory { position });
    }
    match context_length(history) {
        ContextLength::Finite(l) => Ok(w.density(l) / w.tail(l - 1)),
        ContextLength::Infinite => {
            let t = history.len();
            let rest = w.tail_sum(t);
            if rest <= 0.0 {
                return Err(Error::ImpossibleHistory { position: t });
            }
            Ok(w.tail(t) / rest)
        }
    }
}

fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Waiting-time entropy, entropy rate, and the block entropy at `block_len`.
///
/// The block entropy uses the closed form
///
/// ```text
/// H_t = ln mu - (1/mu) R(t) ln R(t) - (2/mu) sum_{s=1}^{t} Q(s-1) ln Q(s-1)
///       - (1/mu) sum_{s=1}^{t} (t - s) p(s) ln p(s)
/// ```
///
/// with `R(t) = sum_{s>=t} Q(s)`; `H_t / t` converges to the entropy rate.
pub fn entropy_summary(w: &WaitingTimeDistribution, block_len: usize) -> EntropySummary {
    assert!(block_len >= 1);
    let mu = w.mean();
    let n = w.support_max();

    let mut hp = Neumaier::new();
    for s in 1..=n {
        hp.add(-xlnx(w.density(s)));
    }
    let waiting_entropy = hp.total();

    let mut block = Neumaier::new();
    block.add(mu.ln());
    block.add(-xlnx(w.tail_sum(block_len)) / mu);
    for s in 1..=block_len.min(n + 1) {
        block.add(-2.0 * xlnx(w.tail(s - 1)) / mu);
    }
    for s in 1..=block_len.min(n) {
        block.add(-((block_len - s) as f64) * xlnx(w.density(s)) / mu);
    }

    EntropySummary {
        waiting_entropy,
        entropy_rate: waiting_entropy / mu,
        block_entropy: block.total(),
        block_len,
    }
}

/// The geometric law `p(s) = mu^-s (mu-1)^(s-1)`: the unique entropy
/// maximizer among waiting-time laws with the given mean. Its entropy is
/// `mu ln mu + (1 - mu) ln(mu - 1)`.
pub fn max_entropy_distribution(mu: f64) -> Result<WaitingTimeDistribution> {
    WaitingTimeDistribution::geometric(mu)
}

/// Entropy of the maximum-entropy law with the given mean.
pub fn max_entropy_value(mu: f64) -> f64 {
    if mu <= 1.0 {
        0.0
    } else {
        mu * mu.ln() + (1.0 - mu) * (mu - 1.0).ln()
    }
}

/// Exhaustively count patterns of length `len` whose equipartition
/// statistic lies within `epsilon` of the waiting-time entropy.
pub fn typical_set(
    w: &WaitingTimeDistribution,
    len: usize,
    epsilon: f64,
) -> Result<TypicalSetSummary> {
    if len == 0 || len > ENUMERATION_CAP {
        return Err(Error::PatternTooLong {
            len,
            cap: ENUMERATION_CAP,
        });
    }
    let mu = w.mean();
    let entropy = entropy_summary(w, 1).waiting_entropy;
    let total = 1u64 << len;
    let mut count = 0u64;
    let mut mass = Neumaier::new();
    let mut ones = Vec::with_capacity(len);
    for mask in 0..total {
        ones.clear();
        let mut m = mask;
        while m != 0 {
            ones.push(m.trailing_zeros() as usize + 1);
            m &= m - 1;
        }
        if let LogProb::Value(lp) = log_prob_from_ones(w, ones.iter().copied(), len) {
            let stat = (mu / len as f64) * lp + entropy;
            if stat.abs() <= epsilon {
                count += 1;
                mass.add(lp.exp());
            }
        }
    }
    Ok(TypicalSetSummary {
        count,
        mass: mass.total(),
        total,
    })
}
