use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Raised by the solver when the condition estimate exceeds the guard.
    #[error("matrix is singular to working precision (condition estimate {condition:e})")]
    SingularMatrix { condition: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A stacked channel matrix could not be inverted reliably. The channel
    /// draw should be discarded and resampled.
    #[error("ill-conditioned channel for user {user} (condition estimate {condition:e})")]
    IllConditionedChannel { user: usize, condition: f64 },

    #[error("effective channel of user {user} is rank deficient (rank {rank}, need {expected})")]
    DecodeFailure {
        user: usize,
        rank: usize,
        expected: usize,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("domain error: {0}")]
    Domain(String),
}
