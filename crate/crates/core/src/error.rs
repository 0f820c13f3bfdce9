use thiserror::Error;

/// Crate-wide error type. Diagnostic values are carried as `f64` regardless
/// of the scalar type the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A frequency evaluation produced `Omega <= 0`.
    #[error("non-positive frequency {omega} at argument {arg}")]
    NonPositiveFrequency { arg: f64, omega: f64 },

    /// Evaluation outside a tabulated or integrated span.
    #[error("argument {value} outside covered range [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },

    /// `|x|` fell below the machine-scale floor guarding `k/x^3`.
    #[error("division by zero: |x| = {x} below floor {floor}")]
    DivisionByZero { x: f64, floor: f64 },

    /// The adaptive step size underflowed.
    #[error("step size underflow at t = {t}")]
    StepFailure { t: f64 },

    /// No real superposition constants exist for the requested data.
    #[error("no real superposition constants for x0 = {x0}")]
    NoRealConstants { x0: f64 },

    /// The superposition quadratic form became non-positive.
    #[error("negative radicand {value} at t = {t}")]
    NegativeRadicand { t: f64, value: f64 },

    /// Initial data does not lie on any zeroth-order orbit.
    #[error("initial data off the asymptotic orbit family (implied cos = {implied_cos})")]
    OffOrbit { implied_cos: f64 },

    /// The auxiliary function rho reached zero; the map is singular there.
    #[error("rho zero crossing near t = {t}")]
    RhoZeroCrossing { t: f64 },

    /// No usable monotone-in-x arc in the trajectory.
    #[error("no monotone arc of at least {min_len} samples")]
    NonMonotoneArc { min_len: usize },

    /// The time-dependent mass must stay positive.
    #[error("non-positive mass {m} at t = {t}")]
    NonPositiveMass { t: f64, m: f64 },

    /// Gaussian width must stay positive.
    #[error("non-positive width {x}")]
    NonPositiveWidth { x: f64 },

    /// A finite-difference grid with fewer than 5 points per dimension.
    #[error("grid too coarse: {nq} x {nt} (need at least 5 x 5)")]
    GridTooCoarse { nq: usize, nt: usize },

    /// Fewer than three extrema; no envelope can be extracted.
    #[error("too few extrema ({found}) for envelope extraction")]
    TooFewExtrema { found: usize },

    /// Catch-all for violated preconditions on inputs.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
