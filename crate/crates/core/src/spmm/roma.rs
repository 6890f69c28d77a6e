/// Row start moved back to a vector-aligned position.
///
/// The `mask_prefix_len` borrowed values belong to the previous row and are
/// zeroed before use in the first main-loop step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RomaAdjustment {
    pub aligned_offset: usize,
    pub adjusted_nnz: usize,
    pub mask_prefix_len: usize,
}

/// Reverse-offset memory alignment of one row.
#[inline]
pub fn roma_align(row_offset: usize, row_nnz: usize, vector_width: usize) -> RomaAdjustment {
    debug_assert!(matches!(vector_width, 1 | 2 | 4));
    let mask_prefix_len = row_offset & (vector_width - 1);
    RomaAdjustment {
        aligned_offset: row_offset - mask_prefix_len,
        adjusted_nnz: row_nnz + mask_prefix_len,
        mask_prefix_len,
    }
}
