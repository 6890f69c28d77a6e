use crate::matrix::ValidationReport;

pub type Result<T, E = SparseError> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SparseError {
    #[error("invalid CSR matrix: {0}")]
    Invalid(ValidationReport),

    #[error("{op}: shape mismatch, {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    ShapeMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("invalid tile config: {0}")]
    InvalidTileConfig(&'static str),

    #[error("index {value} does not fit in a {width} index (max {max})")]
    IndexOverflow {
        value: usize,
        max: usize,
        width: crate::IndexWidth,
    },

    #[error("transpose plan built for {plan_rows}x{plan_cols} with {plan_nnz} nonzeros, got {rows}x{cols} with {nnz}")]
    TopologyMismatch {
        plan_rows: usize,
        plan_cols: usize,
        plan_nnz: usize,
        rows: usize,
        cols: usize,
        nnz: usize,
    },

    #[error("bias length {found} does not match {expected} output rows")]
    BiasLength { expected: usize, found: usize },

    #[error("dense data length {found} does not match {rows}x{cols}")]
    DenseLength { rows: usize, cols: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
