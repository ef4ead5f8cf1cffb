//! Crate-wide error type.

/// Errors reported by model construction, inversion, likelihood evaluation,
/// and estimation.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A density table entry is negative beyond rounding tolerance.
    #[error("negative probability mass {mass:e} at entry {index}")]
    NegativeMass { index: usize, mass: f64 },

    /// A density table entry is NaN or infinite.
    #[error("non-finite probability mass at entry {index}")]
    NonFiniteMass { index: usize },

    /// The density table sums to zero.
    #[error("density table has zero total mass")]
    ZeroDistribution,

    /// The density table sums to more than one beyond tolerance.
    #[error("density table mass {total} exceeds 1")]
    MassExceedsOne { total: f64 },

    /// The waiting-time mean failed to evaluate to a finite number.
    #[error("waiting-time mean does not converge")]
    InfiniteMean,

    /// Head plus geometric tail mass differs from one.
    #[error("head plus geometric tail mass {total} differs from 1 beyond 1e-9")]
    MassMismatch { total: f64 },

    /// Geometric tail ratio outside `[0, 1)`.
    #[error("geometric tail ratio must lie in [0, 1), got {lambda}")]
    InvalidLambda { lambda: f64 },

    /// Tail-family exponent outside its admissible range.
    #[error("invalid tail exponent {value}")]
    InvalidExponent { value: f64 },

    /// Tail-family scale constant outside its admissible range.
    #[error("invalid tail scale {value}")]
    InvalidScale { value: f64 },

    /// The prescribed tail would exceed one at t = 1.
    #[error("tail value {value} exceeds 1 at t = 1; reduce the scale")]
    TailExceedsOne { value: f64 },

    /// Requested mean below one.
    #[error("waiting-time mean must be at least 1, got {mu}")]
    InvalidMean { mu: f64 },

    /// No asymptotic comparator is defined for this family.
    #[error("no asymptotic autocovariance formula for this family")]
    UnsupportedFamily,

    /// A covariance spec parameter violates its constraints.
    #[error("covariance spec violation: {reason}")]
    SpecViolation { reason: String },

    /// A covariance entry is zero or negative.
    #[error("covariance entry c[{index}] = {value} is not positive")]
    NonPositiveEntry { index: usize, value: f64 },

    /// The inversion produced a density value too negative to clip: the
    /// prescribed covariance admits no renewal representation at this
    /// tolerance.
    #[error("no renewal representation: p({index}) = {value:e} below the clip tolerance")]
    NotRenewable { index: usize, value: f64 },

    /// The inversion horizon left too much unassigned mass.
    #[error("inversion horizon {horizon} too short: missing mass {missing:e}")]
    HorizonTooShort { horizon: usize, missing: f64 },

    /// Exact evaluation requested for a pattern beyond the enumeration cap.
    #[error("pattern length {len} exceeds the exact-evaluation cap {cap}")]
    PatternTooLong { len: usize, cap: usize },

    /// A pattern entry is neither 0 nor 1.
    #[error("pattern symbol {value} at position {position} is not binary")]
    InvalidSymbol { position: usize, value: u8 },

    /// An observed inter-renewal gap has probability zero under the model.
    #[error("gap {gap} ending at position {position} has probability zero")]
    ZeroProbability { position: usize, gap: usize },

    /// The conditioning history has probability zero under the model.
    #[error("history has probability zero (violation at position {position})")]
    ImpossibleHistory { position: usize },

    /// An observable window is longer than the sequence.
    #[error("window {window} exceeds sequence length {length}")]
    WindowTooLarge { window: usize, length: usize },

    /// The model's second moment is flagged infinite.
    #[error("second moment of the waiting time is infinite")]
    SecondMomentInfinite,

    /// A tail sum had not converged at the supplied horizon.
    #[error("horizon {horizon} insufficient: {detail}")]
    HorizonInsufficient { horizon: usize, detail: String },

    /// A variance of zero cannot standardize deviations.
    #[error("degenerate (zero) variance")]
    DegenerateVariance,

    /// Model descriptor parse or validation failure.
    #[error("model descriptor: {0}")]
    Model(String),

    /// Sequence-file I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),

    /// Sequence file does not follow the expected layout.
    #[error("malformed sequence file: {0}")]
    MalformedSequenceFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
