use alloc::vec::Vec;
use core::fmt;

use crate::element::{IndexWidth, SparseIndex};

/// One broken CSR invariant, positioned by row and/or nonzero position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    OffsetsLength { expected: usize, found: usize },
    FirstOffsetNonZero { found: usize },
    DecreasingOffsets { row: usize },
    FinalOffset { expected: usize, found: usize },
    ValuesLength { expected: usize, found: usize },
    IndexOutOfRange { row: usize, position: usize, col: usize },
    NotAscending { row: usize, position: usize },
    DuplicateIndex { row: usize, position: usize, col: usize },
    NarrowColumns { cols: usize },
    NarrowRowLength { row: usize, len: usize },
    SwizzleLength { expected: usize, found: usize },
    SwizzleNotPermutation { slot: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OffsetsLength { expected, found } => {
                write!(f, "row offsets length {found}, expected {expected}")
            }
            Violation::FirstOffsetNonZero { found } => {
                write!(f, "first row offset is {found}, expected 0")
            }
            Violation::DecreasingOffsets { row } => {
                write!(f, "non-decreasing offsets violated at row {row}")
            }
            Violation::FinalOffset { expected, found } => {
                write!(f, "last row offset {found} does not equal nnz {expected}")
            }
            Violation::ValuesLength { expected, found } => {
                write!(f, "values length {found} does not equal nnz {expected}")
            }
            Violation::IndexOutOfRange { row, position, col } => {
                write!(f, "index out of range: column {col} at row {row}, position {position}")
            }
            Violation::NotAscending { row, position } => {
                write!(f, "column indices not ascending at row {row}, position {position}")
            }
            Violation::DuplicateIndex { row, position, col } => {
                write!(f, "duplicate column {col} at row {row}, position {position}")
            }
            Violation::NarrowColumns { cols } => {
                write!(f, "{cols} columns exceed the 16-bit index limit")
            }
            Violation::NarrowRowLength { row, len } => {
                write!(f, "row {row} has {len} nonzeros, over the 16-bit limit")
            }
            Violation::SwizzleLength { expected, found } => {
                write!(f, "row swizzle has {found} entries, expected {expected}")
            }
            Violation::SwizzleNotPermutation { slot } => {
                write!(f, "row swizzle is not a permutation (slot {slot})")
            }
        }
    }
}

/// Result of [`validate_parts`]; empty when the matrix is well formed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks every CSR invariant on raw arrays and reports all violations.
pub fn validate_parts<I: SparseIndex>(
    rows: usize,
    cols: usize,
    row_offsets: &[usize],
    col_indices: &[I],
    values_len: usize,
) -> ValidationReport {
    let mut violations = Vec::new();
    let nnz = col_indices.len();

    if row_offsets.len() != rows + 1 {
        violations.push(Violation::OffsetsLength {
            expected: rows + 1,
            found: row_offsets.len(),
        });
    }
    if values_len != nnz {
        violations.push(Violation::ValuesLength {
            expected: nnz,
            found: values_len,
        });
    }
    if I::WIDTH == IndexWidth::U16 && cols > I::MAX_EXTENT {
        violations.push(Violation::NarrowColumns { cols });
    }
    if let Some(&first) = row_offsets.first() {
        if first != 0 {
            violations.push(Violation::FirstOffsetNonZero { found: first });
        }
    }
    if let Some(&last) = row_offsets.last() {
        if row_offsets.len() == rows + 1 && last != nnz {
            violations.push(Violation::FinalOffset {
                expected: nnz,
                found: last,
            });
        }
    }

    let mut offsets_ok = true;
    for (row, w) in row_offsets.windows(2).enumerate() {
        if w[1] < w[0] {
            violations.push(Violation::DecreasingOffsets { row });
            offsets_ok = false;
        }
    }
    if !offsets_ok || row_offsets.len() != rows + 1 {
        return ValidationReport { violations };
    }

    for row in 0..rows {
        let start = row_offsets[row].min(nnz);
        let end = row_offsets[row + 1].min(nnz);
        if I::WIDTH == IndexWidth::U16 && end - start > I::MAX_EXTENT {
            violations.push(Violation::NarrowRowLength { row, len: end - start });
        }
        let mut prev: Option<usize> = None;
        for position in start..end {
            let col = col_indices[position].to_usize();
            if col >= cols {
                violations.push(Violation::IndexOutOfRange { row, position, col });
            }
            if let Some(p) = prev {
                if col == p {
                    violations.push(Violation::DuplicateIndex { row, position, col });
                } else if col < p {
                    violations.push(Violation::NotAscending { row, position });
                }
            }
            prev = Some(col);
        }
    }
    ValidationReport { violations }
}
