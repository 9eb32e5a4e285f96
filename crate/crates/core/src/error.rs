/// Errors surfaced by the numerical routines.
///
/// Messages carry the offending quantity (norms, ranks, violated ranges) so
/// callers can report failures without re-deriving context.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(
        "eigendecomposition did not converge within {max_sweeps} shift sweeps \
         (matrix frobenius norm {frobenius:.6e})"
    )]
    EighNoConvergence { max_sweeps: usize, frobenius: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("shape mismatch in {context}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    ShapeMismatch {
        context: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error(
        "rank defect: expected a reference of rank exactly {expected} but found rank {found} \
         (eigenvalue cutoff {cutoff:.3e})"
    )]
    RankDefect {
        expected: usize,
        found: usize,
        cutoff: f64,
    },

    #[error("reference matrix is not positive semidefinite: smallest eigenvalue {lambda_min:.6e}")]
    NotPsd { lambda_min: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}
