use alloc::vec::Vec;

use crate::element::SparseIndex;
use crate::error::{Result, SparseError};

/// Multiplies every column index by the dense row stride so the kernel can
/// offset into the dense operand without per-use index arithmetic.
pub fn prescale_indices<I: SparseIndex>(indices: &[I], row_stride_elements: usize) -> Result<Vec<I>> {
    indices
        .iter()
        .map(|&i| {
            let scaled = i.to_usize().checked_mul(row_stride_elements);
            scaled.and_then(I::from_usize).ok_or(SparseError::IndexOverflow {
                value: scaled.unwrap_or(usize::MAX),
                max: I::MAX_EXTENT,
                width: I::WIDTH,
            })
        })
        .collect()
}

/// Whether every pre-scaled offset of a `cols`-column operand times a dense
/// operand with `stride` columns is representable in `I`.
pub(crate) fn prescale_fits<I: SparseIndex>(cols: usize, stride: usize) -> bool {
    cols == 0 || (cols - 1).checked_mul(stride).is_some_and(|v| v <= I::MAX_EXTENT)
}
