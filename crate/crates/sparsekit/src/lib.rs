//! Host-side companion to `sparsekit-core`: matrix file formats, a
//! thread-pool executor, timing helpers and the `sparsekit` command line.

pub mod cli;
pub mod io;
pub mod pool;
pub mod timing;

pub use pool::PoolExecutor;
