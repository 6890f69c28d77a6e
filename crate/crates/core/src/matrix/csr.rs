use alloc::vec::Vec;
use core::ops::Range;

use super::validate::{validate_parts, ValidationReport, Violation};
use crate::balance::RowSwizzle;
use crate::element::{Element, IndexWidth, SparseIndex};
use crate::error::{Result, SparseError};

/// Compressed-sparse-row matrix.
///
/// Column indices are strictly ascending within each row. Explicitly stored
/// zeros are kept and count as nonzeros. An optional [`RowSwizzle`] may be
/// attached as processing-order metadata; it never permutes the data.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T = f32, I = u32> {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<I>,
    values: Vec<T>,
    swizzle: Option<RowSwizzle>,
}

impl<T: Element, I: SparseIndex> CsrMatrix<T, I> {
    /// Builds a matrix from raw arrays, rejecting any invariant violation.
    pub fn from_parts(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<I>,
        values: Vec<T>,
    ) -> Result<Self> {
        let report = validate_parts(rows, cols, &row_offsets, &col_indices, values.len());
        if !report.is_ok() {
            return Err(SparseError::Invalid(report));
        }
        Ok(Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
            swizzle: None,
        })
    }

    /// A matrix with no stored entries.
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            row_offsets: alloc::vec![0; rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
            swizzle: None,
        }
    }

    pub fn identity(n: usize) -> Result<Self> {
        let col_indices = (0..n)
            .map(|i| {
                I::from_usize(i).ok_or(SparseError::IndexOverflow {
                    value: i,
                    max: I::MAX_EXTENT,
                    width: I::WIDTH,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(n, n, (0..=n).collect(), col_indices, alloc::vec![T::ONE; n])
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    #[inline]
    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    #[inline]
    pub fn col_indices(&self) -> &[I] {
        &self.col_indices
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Values can change freely; the topology cannot.
    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn index_width(&self) -> IndexWidth {
        I::WIDTH
    }

    #[inline]
    pub fn row_range(&self, row: usize) -> Range<usize> {
        self.row_offsets[row]..self.row_offsets[row + 1]
    }

    #[inline]
    pub fn row_len(&self, row: usize) -> usize {
        self.row_offsets[row + 1] - self.row_offsets[row]
    }

    /// Column indices and values of one row.
    pub fn row(&self, row: usize) -> (&[I], &[T]) {
        let r = self.row_range(row);
        (&self.col_indices[r.clone()], &self.values[r])
    }

    pub fn row_lengths(&self) -> impl ExactSizeIterator<Item = usize> + Clone + '_ {
        self.row_offsets.windows(2).map(|w| w[1] - w[0])
    }

    /// Iterates `(row, col, value)` in storage order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.rows).flat_map(move |r| {
            self.row_range(r)
                .map(move |p| (r, self.col_indices[p].to_usize(), self.values[p]))
        })
    }

    pub fn swizzle(&self) -> Option<&RowSwizzle> {
        self.swizzle.as_ref()
    }

    /// Attaches a processing order; it must cover exactly this matrix's rows.
    pub fn with_swizzle(mut self, swizzle: RowSwizzle) -> Result<Self> {
        if swizzle.len() != self.rows {
            return Err(SparseError::Invalid(ValidationReport {
                violations: alloc::vec![Violation::SwizzleLength {
                    expected: self.rows,
                    found: swizzle.len(),
                }],
            }));
        }
        self.swizzle = Some(swizzle);
        Ok(self)
    }

    pub fn without_swizzle(mut self) -> Self {
        self.swizzle = None;
        self
    }

    /// Same topology, new values.
    pub fn with_values<U: Element>(&self, values: Vec<U>) -> Result<CsrMatrix<U, I>> {
        if values.len() != self.nnz() {
            return Err(SparseError::Invalid(ValidationReport {
                violations: alloc::vec![Violation::ValuesLength {
                    expected: self.nnz(),
                    found: values.len(),
                }],
            }));
        }
        Ok(CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values,
            swizzle: self.swizzle.clone(),
        })
    }

    pub fn map_values<U: Element>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U, I> {
        CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            swizzle: self.swizzle.clone(),
        }
    }

    /// Rounds values to `U` through `f32`.
    pub fn convert_values<U: Element>(&self) -> CsrMatrix<U, I> {
        self.map_values(|v| U::from_f32(v.to_f32()))
    }

    /// Re-encodes column indices in another width.
    pub fn to_index_width<J: SparseIndex>(&self) -> Result<CsrMatrix<T, J>> {
        if J::WIDTH == IndexWidth::U16 && self.cols > J::MAX_EXTENT {
            return Err(SparseError::IndexOverflow {
                value: self.cols,
                max: J::MAX_EXTENT,
                width: J::WIDTH,
            });
        }
        let col_indices = self
            .col_indices
            .iter()
            .map(|&c| {
                J::from_usize(c.to_usize()).ok_or(SparseError::IndexOverflow {
                    value: c.to_usize(),
                    max: J::MAX_EXTENT,
                    width: J::WIDTH,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let report = validate_parts(self.rows, self.cols, &self.row_offsets, &col_indices, self.values.len());
        if !report.is_ok() {
            return Err(SparseError::Invalid(report));
        }
        Ok(CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            row_offsets: self.row_offsets.clone(),
            col_indices,
            values: self.values.clone(),
            swizzle: self.swizzle.clone(),
        })
    }

    /// True when both matrices have the same shape, offsets and indices.
    pub fn same_structure<U>(&self, other: &CsrMatrix<U, I>) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self.row_offsets == other.row_offsets
            && self.col_indices == other.col_indices
    }

    pub fn into_parts(self) -> (usize, usize, Vec<usize>, Vec<I>, Vec<T>) {
        (self.rows, self.cols, self.row_offsets, self.col_indices, self.values)
    }

    /// Re-checks all invariants.
    pub fn validate(&self) -> ValidationReport {
        let mut report = validate_parts(
            self.rows,
            self.cols,
            &self.row_offsets,
            &self.col_indices,
            self.values.len(),
        );
        if let Some(sw) = &self.swizzle {
            if sw.len() != self.rows {
                report.violations.push(Violation::SwizzleLength {
                    expected: self.rows,
                    found: sw.len(),
                });
            } else if let Err(slot) = sw.check_permutation() {
                report.violations.push(Violation::SwizzleNotPermutation { slot });
            }
        }
        report
    }

    // Constructor for callers in this crate that already guarantee validity.
    pub(crate) fn from_parts_unchecked(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<I>,
        values: Vec<T>,
    ) -> Self {
        debug_assert!(validate_parts(rows, cols, &row_offsets, &col_indices, values.len()).is_ok());
        Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
            swizzle: None,
        }
    }
}

/// Checks every invariant of `m`.
pub fn validate<T: Element, I: SparseIndex>(m: &CsrMatrix<T, I>) -> ValidationReport {
    m.validate()
}
