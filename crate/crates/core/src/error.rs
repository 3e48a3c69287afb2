use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element has {got} residues, group has {expected} cyclic factors")]
    ArityMismatch { expected: usize, got: usize },

    #[error("invalid group descriptor {0:?}")]
    GroupDescriptor(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("not a complex Hadamard matrix (modulus defect {modulus:.3e}, orthogonality defect {orthogonality:.3e})")]
    NotHadamard { modulus: f64, orthogonality: f64 },

    #[error("phase matrix is not dephased")]
    NotDephased,

    #[error("duality needs index size == block dimension (got {index_size} vs {block_dim})")]
    NotSquareConfiguration { index_size: usize, block_dim: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("resource cap exceeded: {what} needs {size}, cap is {cap}")]
    ResourceCap { what: &'static str, size: u128, cap: u128 },

    #[error("exact counter overflow in {0}")]
    Overflow(&'static str),

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("partition is crossing")]
    Crossing,

    #[error("semidirect elements belong to different contexts")]
    ContextMismatch,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
