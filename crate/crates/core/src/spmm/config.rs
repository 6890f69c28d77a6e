use core::fmt;

use crate::error::{Result, SparseError};

/// Largest supported `block_items_k`; bounds the per-task staging buffers.
pub const MAX_BLOCK_ITEMS_K: usize = 256;
/// Largest supported `block_items_x`; bounds the per-task accumulators.
pub const MAX_BLOCK_ITEMS_X: usize = 256;

/// Decomposition parameters shared by the SpMM and SDDMM kernels.
///
/// For SpMM a task computes `block_items_y` output rows, each restricted to
/// `block_items_x` consecutive columns, stepping through the sparse row
/// `block_items_k` nonzeros at a time. For SDDMM `block_items_x` is the
/// number of consecutive nonzeros of one row handled per task.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TileConfig {
    pub block_items_k: usize,
    pub block_items_x: usize,
    pub block_items_y: usize,
    /// Elements per wide load/store: 1, 2 or 4.
    pub vector_width: usize,
}

impl TileConfig {
    pub fn new(block_items_k: usize, block_items_x: usize, block_items_y: usize, vector_width: usize) -> Result<Self> {
        let cfg = Self {
            block_items_k,
            block_items_x,
            block_items_y,
            vector_width,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// One row, one lane, no vectorization.
    pub const fn scalar(block_items_x: usize) -> Self {
        Self {
            block_items_k: 8,
            block_items_x,
            block_items_y: 1,
            vector_width: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.vector_width, 1 | 2 | 4) {
            return Err(SparseError::InvalidTileConfig("vector width must be 1, 2 or 4"));
        }
        let k_unit = 4 * self.vector_width;
        if self.block_items_k == 0 || !self.block_items_k.is_multiple_of(k_unit) {
            return Err(SparseError::InvalidTileConfig(
                "block_items_k must be a positive multiple of 4 * vector width",
            ));
        }
        if self.block_items_k > MAX_BLOCK_ITEMS_K {
            return Err(SparseError::InvalidTileConfig("block_items_k exceeds 256"));
        }
        if self.block_items_x == 0 || !self.block_items_x.is_multiple_of(self.vector_width) {
            return Err(SparseError::InvalidTileConfig(
                "block_items_x must be a positive multiple of vector width",
            ));
        }
        if self.block_items_x > MAX_BLOCK_ITEMS_X {
            return Err(SparseError::InvalidTileConfig("block_items_x exceeds 256"));
        }
        if !matches!(self.block_items_y, 1 | 2 | 4 | 8) {
            return Err(SparseError::InvalidTileConfig("block_items_y must be 1, 2, 4 or 8"));
        }
        Ok(())
    }

    /// Same tiling with a different vector width; `block_items_k` is kept if
    /// still legal, otherwise rounded up to the next legal multiple.
    pub fn with_vector_width(self, vector_width: usize) -> Result<Self> {
        let unit = 4 * vector_width;
        let k = self.block_items_k.div_ceil(unit.max(1)) * unit;
        let x = self.block_items_x.div_ceil(vector_width.max(1)) * vector_width;
        Self::new(k, x, self.block_items_y, vector_width)
    }
}

impl fmt::Display for TileConfig {
    /// `YxKxXxV`, e.g. `1x32x64x4`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}x{}x{}x{}",
            self.block_items_y, self.block_items_k, self.block_items_x, self.vector_width
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Spmm,
    Sddmm,
}

/// Kernel-selection heuristic.
///
/// `n` is the number of output columns for SpMM and the inner (dot product)
/// dimension for SDDMM, i.e. the dimension the wide loads run along.
pub fn default_tile_config(n: usize, kernel: KernelKind) -> TileConfig {
    let n = n.max(1);
    let block_items_x = match kernel {
        KernelKind::Spmm => n.next_power_of_two().min(64),
        KernelKind::Sddmm => 32,
    };
    let vector_width = [4, 2, 1]
        .into_iter()
        .find(|w| block_items_x % w == 0 && n.is_multiple_of(*w))
        .unwrap_or(1);
    let block_items_k = match vector_width {
        4 => 32,
        2 => 16,
        _ => 8,
    };
    let block_items_y = if block_items_x >= 32 {
        1
    } else {
        (32 / block_items_x).min(8)
    };
    TileConfig {
        block_items_k,
        block_items_x,
        block_items_y,
        vector_width,
    }
}
