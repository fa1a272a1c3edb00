use thiserror::Error;

/// Failures surfaced by the numerical and algebraic routines.
///
/// Parse failures of the operator language live in [`crate::dsl::DslError`];
/// everything here is about mathematics that could not be carried out.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("operator is not degenerate exactly-solvable: {0}")]
    NotDegenerate(String),

    /// `lambda_m == lambda_n` for some `m < n`: the eigenpolynomial of degree
    /// `n` is not unique (or does not exist).
    #[error("spectral collision: lambda_{m} equals lambda_{n}")]
    SpectralCollision { m: usize, n: usize },

    #[error("root finder did not converge for degree {degree} (reached {precision} bits)")]
    NoConvergence { degree: usize, precision: u32 },

    /// A value overflowed the big-float exponent range; retry at a higher
    /// precision or with a rescaled input.
    #[error("overflow at {precision} bits; escalate precision")]
    PrecisionEscalation { precision: u32 },

    #[error("evaluation point lies within {distance:e} of an atom")]
    PoleProximity { distance: f64 },

    #[error("need at least {needed} usable records, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("point is within {distance:e} of the discriminant locus")]
    NearDiscriminant { distance: f64 },

    #[error("branch continuation stalled at t = {t}")]
    ContinuationStall { t: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
