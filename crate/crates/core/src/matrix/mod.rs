//! Sparse and dense matrix containers and the operations that build,
//! check, convert and describe them.

mod convert;
mod csr;
mod dense;
mod random;
mod stats;
mod transpose;
mod validate;

pub use convert::{csr_from_dense, csr_to_dense};
pub use csr::{validate, CsrMatrix};
pub use dense::{BitPattern, DenseMatrix};
pub use random::{lognormal_row_lengths, random_csr, random_dense, RowProfile};
pub use stats::{compute_stats, row_length_stats, MatrixStats};
pub use transpose::{apply_transpose, transpose, transpose_plan, TransposePlan};
pub use validate::{validate_parts, ValidationReport, Violation};
