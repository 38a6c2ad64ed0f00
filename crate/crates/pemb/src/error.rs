use thiserror::Error;

/// Errors surfaced by parsing, validation and construction.
///
/// Query methods on the built structures treat out-of-range arguments as
/// contract violations and panic with a descriptive message instead; the
/// callers (CLI, tests) validate indices against `n` and `2m` first.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed input text or binary layout.
    #[error("format: {0}")]
    Format(String),

    /// Structurally well-formed input that violates a graph invariant,
    /// e.g. a disconnected rotation system.
    #[error("validation: {0}")]
    Validation(String),

    /// Builder inputs that do not fit together, e.g. a spanning tree
    /// that does not span the given rotation system.
    #[error("inconsistent input: {0}")]
    Inconsistent(String),

    /// Internal structural failure, e.g. a broken successor chain
    /// detected during list ranking.
    #[error("structural: {0}")]
    Structural(String),
}

pub type Result<T> = std::result::Result<T, Error>;
