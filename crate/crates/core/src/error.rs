use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid code parameters: {0}")]
    Params(String),

    #[error("field error: {0}")]
    Field(String),

    #[error("division by zero in the field")]
    DivisionByZero,

    #[error("field of order {order} is too small: need at least {needed} distinct elements; use a 16-bit field")]
    FieldTooSmall { order: usize, needed: usize },

    #[error("rho must be a nonzero field element")]
    ZeroRho,

    #[error("no rho in the {width}-bit field makes the code MDS (degree bound {degree_bound}); escalate the field width")]
    RhoNotFound { width: u8, degree_bound: u128 },

    #[error("MDS check would enumerate {subsets} subsets, over the budget of {budget}")]
    BudgetExceeded { subsets: u128, budget: u128 },

    #[error("need at least {needed} nodes, got {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("available blocks are inconsistent with any codeword")]
    Corruption,

    #[error("invalid repair request: {0}")]
    Repair(String),

    #[error("fetch of node {node} tuple {tuple} failed: {reason}")]
    Fetch {
        node: usize,
        tuple: usize,
        reason: String,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
