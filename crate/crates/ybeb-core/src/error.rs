use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by all modules.
///
/// Report-style operations (verifiers, scans) never fail; they return
/// residuals instead. Errors are reserved for malformed inputs and for
/// solver steps whose failure is itself the result of the computation
/// (a conclusively negative integrability test).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator support out of range: {0}")]
    OutOfRange(String),

    #[error("invalid site index: {0}")]
    InvalidSite(String),

    #[error("unsupported local dimension {0} (supported: 2..=6)")]
    UnsupportedDim(usize),

    #[error("generator basis is not trace-orthogonal: {0}")]
    BasisNotOrthogonal(String),

    #[error("operator mismatch with the supplied basis: {0}")]
    BasisMismatch(String),

    #[error("operator is not a telescoping divergence: residual {residual:.3e} at c-power {c_power}")]
    NotADivergence { residual: f64, c_power: usize },

    #[error("generalized inversion did not terminate within {bound} shifts (last term norm {last_norm:.3e})")]
    NonTerminating { bound: usize, last_norm: f64 },

    #[error("Reshetikhin condition violated: divergence residual {residual:.3e}")]
    NotIntegrable { residual: f64 },

    #[error("odd-power unitarity violated at order {order}: residual {residual:.3e}")]
    OddUnitarityViolation { order: usize, residual: f64 },

    #[error("higher-order condition violated at m = {m}: residual {residual:.3e}")]
    HigherConditionViolated { m: usize, residual: f64 },

    #[error("no admissible shift constant at m = {m}: {detail}")]
    NoAdmissibleShift { m: usize, detail: String },

    #[error("too many simultaneous shift-constant branches: {0} (limit 8)")]
    TooManyBranches(usize),

    #[error("transfer-matrix truncation too shallow: order {0} < 2")]
    TruncationTooShallow(usize),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("bad model parameters: {0}")]
    BadParams(String),

    #[error("infeasible problem size: {0}")]
    InfeasibleSize(String),
}
