//! Stationary sequence generation.
//!
//! The first renewal time is drawn from the stationary delay law, every
//! later gap from the waiting-time law, both by inverse-CDF binary search
//! with the tie rule "u <= CDF(s) selects the smallest such s" for uniform
//! draws on `(0, 1]`. Generation is streaming: O(length) time and O(1)
//! state beyond the output bits.
//!
//! Replica `k` of a run uses the stream `stream_seed(base_seed, k)`, so
//! replicas are independent and each is reproducible bit-for-bit.

use crate::dist::WaitingTimeDistribution;
use crate::rng::{stream_seed, SplitMix64};
use crate::seq::BinarySequence;
use crate::sum::Neumaier;

/// Immutable sampling tables for one model; shareable across threads.
#[derive(Debug, Clone)]
pub struct Sampler {
    delay_cdf: Vec<f64>,
    waiting_cdf: Vec<f64>,
    model_id: u64,
}

/// One generation stream: RNG state plus the next pending renewal time.
#[derive(Debug, Clone)]
pub struct GeneratorState {
    rng: SplitMix64,
    next_renewal: u64,
    position: u64,
}

fn cumulative(densities: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = Neumaier::new();
    let mut running = 0.0f64;
    let mut cdf: Vec<f64> = densities
        .map(|p| {
            acc.add(p);
            // The compensated total can wobble by an ulp; the lookup table
            // must be non-decreasing for binary search.
            running = running.max(acc.total());
            running
        })
        .collect();
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    cdf
}

/// Smallest `s` (1-based) with `cdf[s-1] >= u`.
#[inline]
fn inverse_cdf(cdf: &[f64], u: f64) -> usize {
    cdf.partition_point(|&c| c < u) + 1
}

/// Stable content hash of a density table (FNV-1a over the bit patterns).
fn content_id(w: &WaitingTimeDistribution) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    for &p in w.density_table() {
        eat(p.to_bits());
    }
    h
}

impl Sampler {
    /// Build sampling tables for `w`; the model id defaults to a content
    /// hash of the density table.
    pub fn new(w: &WaitingTimeDistribution) -> Self {
        let delay = w.stationary_delay();
        Self {
            delay_cdf: cumulative(delay.density_table().iter().copied()),
            waiting_cdf: cumulative(w.density_table().iter().copied()),
            model_id: content_id(w),
        }
    }

    /// Override the model id (e.g. with a descriptor hash).
    pub fn with_model_id(mut self, id: u64) -> Self {
        self.model_id = id;
        self
    }

    pub fn model_id(&self) -> u64 {
        self.model_id
    }

    /// Draw the first waiting time (stationary delay law).
    pub fn sample_first_waiting(&self, rng: &mut SplitMix64) -> usize {
        inverse_cdf(&self.delay_cdf, rng.next_unit())
    }

    /// Draw a subsequent waiting time.
    pub fn sample_waiting(&self, rng: &mut SplitMix64) -> usize {
        inverse_cdf(&self.waiting_cdf, rng.next_unit())
    }

    /// Start a generation stream.
    pub fn start(&self, seed: u64) -> GeneratorState {
        let mut rng = SplitMix64::new(seed);
        let first = self.sample_first_waiting(&mut rng) as u64;
        GeneratorState {
            rng,
            next_renewal: first,
            position: 0,
        }
    }

    /// Generate `len` symbols from the stream seeded with `seed`.
    pub fn generate(&self, len: usize, seed: u64) -> BinarySequence {
        let mut seq = BinarySequence::with_len(len, seed, self.model_id);
        let mut state = self.start(seed);
        while (state.next_renewal as usize) <= len {
            seq.set_one(state.next_renewal as usize - 1);
            state.next_renewal += self.sample_waiting(&mut state.rng) as u64;
        }
        seq
    }

    /// Generate `n` independent replicas; replica `k` is
    /// `generate(len, stream_seed(base_seed, k))`. Replicas are produced in
    /// index order regardless of `threads`.
    pub fn generate_replicas(
        &self,
        len: usize,
        base_seed: u64,
        n: usize,
        threads: usize,
    ) -> Vec<BinarySequence> {
        let threads = threads.max(1).min(n.max(1));
        if threads <= 1 || n <= 1 {
            return (0..n)
                .map(|k| self.generate(len, stream_seed(base_seed, k as u64)))
                .collect();
        }
        let mut out: Vec<Option<BinarySequence>> = vec![None; n];
        let chunk = n.div_ceil(threads);
        std::thread::scope(|scope| {
            for (slot_chunk, start) in out.chunks_mut(chunk).zip((0..n).step_by(chunk)) {
                scope.spawn(move || {
                    for (offset, slot) in slot_chunk.iter_mut().enumerate() {
                        let k = start + offset;
                        *slot = Some(self.generate(len, stream_seed(base_seed, k as u64)));
                    }
                });
            }
        });
        out.into_iter().map(|s| s.unwrap()).collect()
    }
}

impl GeneratorState {
    /// Produce the next symbol; `true` marks a renewal.
    pub fn next_symbol(&mut self, sampler: &Sampler) -> bool {
        self.position += 1;
        if self.position == self.next_renewal {
            self.next_renewal += sampler.sample_waiting(&mut self.rng) as u64;
            true
        } else {
            false
        }
    }

    /// 1-based time of the next pending renewal.
    pub fn pending_renewal(&self) -> u64 {
        self.next_renewal
    }
}
