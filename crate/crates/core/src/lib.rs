//! Sparse matrix kernels for deep-learning shaped problems.
//!
//! This crate is `no_std` and only needs `alloc`. It contains:
//!
//! - [`matrix`]: CSR and dense matrix types, validation, conversion, transpose,
//!   row-length statistics and seeded random generators.
//! - [`spmm`]: tiled sparse × dense multiplication with reverse-offset memory
//!   alignment, multi-row tiles, index pre-scaling, unrolled residue handling,
//!   mixed precision and a fused bias/ReLU epilogue.
//! - [`sddmm`]: sampled dense–dense multiplication over a fixed CSR pattern.
//! - [`balance`]: row swizzles and a first-wave/greedy thread-block scheduler
//!   model used to predict load imbalance.
//! - [`attention`]: causal band masks, sparse softmax and the
//!   SDDMM → softmax → SpMM attention pipeline.
//!
//! Kernels split their work into independent tasks and hand them to an
//! [`Executor`]. [`Sequential`] runs tasks in order on the calling thread;
//! the `sparsekit` crate provides a thread-pool executor.

#![no_std]
#![deny(unsafe_op_in_unsafe_fn)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod attention;
pub mod balance;
mod element;
mod error;
mod exec;
pub mod matrix;
pub mod sddmm;
pub mod spmm;
pub mod verify;

pub use element::{Element, IndexWidth, Precision, SparseIndex};
pub use error::{Result, SparseError};
pub use exec::{Executor, Sequential};
pub use half::f16;
pub use matrix::{CsrMatrix, DenseMatrix, MatrixStats};
