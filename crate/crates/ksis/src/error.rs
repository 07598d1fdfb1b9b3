//! Crate-wide error type.

use crate::kernel::KernelViolation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Scheme parameters out of range (k, n, dimensions, modulus, ...).
    #[error("parameter error: {0}")]
    Parameter(String),

    /// Arithmetic outside its domain, e.g. inverting zero.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structurally well-typed input that violates an operation's contract.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Fewer shares supplied than the threshold requires.
    #[error("insufficient shares: need {needed}, got {got}")]
    InsufficientShares { needed: usize, got: usize },

    /// Malformed file or wire data (PGM, PBM, share bundles).
    #[error("format error: {0}")]
    Format(String),

    /// A bitmap that does not satisfy the kernel rules.
    #[error("invalid kernel: {}", format_violations(.0))]
    InvalidKernel(Vec<KernelViolation>),

    /// No consistent interpretation of the shares exists.
    #[error("reconstruction failed: {0}")]
    ReconstructionFailure(String),

    /// The pooled kernel shares do not regenerate a well-formed kernel;
    /// at least one share is corrupted or forged.
    #[error("possible forged or corrupted share: {0}")]
    ForgedShareSuspected(String),

    /// Pearson correlation is undefined for the given samples.
    #[error("correlation undefined: {0}")]
    CorrelationUndefined(String),

    /// The single-share estimator has no inverse at this evaluation point.
    #[error("attack undefined at x = {x}: geometric sum is not invertible")]
    AttackUndefined { x: u16 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(violations: &[KernelViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
