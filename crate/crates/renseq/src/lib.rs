//! Stationary binary sequences from discrete-time delayed renewal
//! processes.
//!
//! Symbol 1 marks the renewal times of a delayed renewal process; drawing
//! the first waiting time from the stationary delay law makes the sequence
//! stationary, time-reversible, and fully determined by one ingredient:
//! the waiting-time distribution. The crate covers the resulting workflow
//! end to end:
//!
//! * [`dist`] - waiting-time laws (tables, Markov, polynomial and
//!   stretched-exponential tails) and the stationary delay law;
//! * [`renewal`] - the direct problem: autocovariance from the waiting
//!   law via the renewal recursion, with subexponential comparators;
//! * [`inverse`] - the inverse problem: the unique waiting law behind a
//!   prescribed Kaluza covariance sequence;
//! * [`sampler`] - reproducible sequence generation;
//! * [`likelihood`] - exact block probabilities, conditional next-symbol
//!   laws, entropies, and equipartition statistics;
//! * [`estimators`] - empirical means with CLT-grade error bars, mixing
//!   bounds, and consistency identities;
//! * [`model`] - JSON descriptors tying it all to the CLI.
//!
//! ```
//! use renseq::dist::WaitingTimeDistribution;
//! use renseq::renewal::solve_renewal;
//! use renseq::sampler::Sampler;
//!
//! // Fair-coin model: geometric waiting times with mean 2.
//! let w = WaitingTimeDistribution::geometric(2.0)?;
//! let cov = solve_renewal(&w, 8);
//! assert!(cov.autocovariance(3).abs() < 1e-12);
//!
//! let seq = Sampler::new(&w).generate(1000, 42);
//! assert_eq!(seq.len(), 1000);
//! # Ok::<(), renseq::Error>(())
//! ```

// Parameter guards are written `!(x > 0.0)` on purpose: the negation is
// true for NaN, which `x <= 0.0` would wave through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dist;
pub mod estimators;
mod error;
pub mod inverse;
pub mod likelihood;
pub mod model;
pub mod renewal;
pub mod rng;
pub mod sampler;
pub mod seq;
mod sum;

pub use error::{Error, Result};

// The guide chapters double as doc-tests so their code stays honest.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }

    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(waiting_times, "../../../book/src/waiting-times.md");
    chapter!(correlations, "../../../book/src/correlations.md");
    chapter!(inverse_problem, "../../../book/src/inverse-problem.md");
    chapter!(sampling, "../../../book/src/sampling.md");
    chapter!(entropy, "../../../book/src/entropy.md");
    chapter!(estimation, "../../../book/src/estimation.md");
    chapter!(cli, "../../../book/src/cli.md");
}
