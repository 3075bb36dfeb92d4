use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(usize),

    #[error("invalid rank k={k} for dimension d={d}")]
    InvalidRank { d: usize, k: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("register structure: {0}")]
    Structure(String),

    #[error("invalid Schatten order {0} (need p >= 1)")]
    InvalidOrder(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid budget: {0}")]
    InvalidBudget(String),

    #[error("construction failed after {attempts} attempts: {reason}")]
    Construction { attempts: usize, reason: String },

    #[error("degenerate net: {0}")]
    DegenerateNet(String),

    #[error(
        "infeasible codebook: max overlap {max_overlap:.6} (mean {mean_overlap:.6}, \
         {offending_pairs} offending pairs) against bound {bound:.6}"
    )]
    InfeasibleCodebook { max_overlap: f64, mean_overlap: f64, offending_pairs: usize, bound: f64 },

    #[error("unsupported protocol: {0}")]
    Unsupported(String),

    #[error("infeasible: {0}")]
    Infeasible(String),
}
