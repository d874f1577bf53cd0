//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by algebra, calculus, and dynamics operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("algebra mismatch: {0}")]
    AlgebraMismatch(String),

    #[error("basis mismatch: {0}")]
    BasisMismatch(String),

    #[error("derivation lies outside the Z(A)-span of the basis (residual {residual:.3e})")]
    NotInSpan { residual: f64 },

    #[error("not a *-isomorphism: {0}")]
    NotIsomorphism(String),

    #[error("commutative polynomial algebras have no nonzero inner derivations")]
    NoInnerDerivations,

    #[error("algebra is not special: needs a trivial center and only inner derivations")]
    NotSpecial,

    #[error("no Hamiltonian derivation in the solver space (residual {residual:.3e})")]
    NonDegeneracyFailure { residual: f64 },

    #[error("Hamiltonian derivation is not unique (kernel dimension {kernel_dim})")]
    NotUnique { kernel_dim: usize },

    #[error("generators do not close under the Lie bracket: {witness}")]
    NotLieSubalgebra { witness: String },

    #[error("structure parameter must be nonzero")]
    ZeroParameter,

    #[error("tensor pair is unclassified or inconsistent: {0}")]
    UnclassifiedWorld(String),

    #[error("coupling forbidden for this pair of structures: {0}")]
    ForbiddenCoupling(String),

    #[error("integration step too large: local error estimate {estimate:.3e} exceeds {bound:.3e}")]
    StepTooLarge { estimate: f64, bound: f64 },

    #[error("system spec error: {0}")]
    SpecParse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
