//! Tiled sparse-matrix × dense-matrix multiplication.
//!
//! The output is cut into 1-D tiles: one (group of) output row(s) by
//! `block_items_x` columns. A task walks its sparse row in steps of
//! `block_items_k` nonzeros, staging values and dense-row offsets in a
//! fixed-size buffer and accumulating into a fixed-size local tile.
//!
//! Row starts are moved back to the vector width with reverse-offset memory
//! alignment so full steps can use wide loads; the borrowed prefix is zeroed.
//! Trailing partial steps are zero-padded to a multiple of four and run
//! through the same unrolled loop.

mod config;
mod kernel;
mod prescale;
mod reference;
mod roma;

pub use config::{default_tile_config, KernelKind, TileConfig, MAX_BLOCK_ITEMS_K, MAX_BLOCK_ITEMS_X};
pub(crate) use kernel::check_swizzle;
pub use kernel::{spmm, spmm_mixed, spmm_with, Epilogue, KernelToggles, SpmmOptions};
pub use prescale::prescale_indices;
pub use reference::spmm_reference;
pub use roma::{roma_align, RomaAdjustment};
