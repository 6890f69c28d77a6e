use alloc::vec;
use alloc::vec::Vec;

use crate::element::{Element, SparseIndex};
use crate::error::{Result, SparseError};
use crate::matrix::{CsrMatrix, ValidationReport, Violation};

/// Processing order of rows: slot `t` processes source row `order[t]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSwizzle {
    order: Vec<usize>,
}

impl RowSwizzle {
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let sw = Self { order };
        sw.check_permutation().map_err(|slot| {
            SparseError::Invalid(ValidationReport {
                violations: vec![Violation::SwizzleNotPermutation { slot }],
            })
        })?;
        Ok(sw)
    }

    pub fn natural(rows: usize) -> Self {
        Self {
            order: (0..rows).collect(),
        }
    }

    #[inline]
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// `Err(slot)` names the first slot holding an out-of-range or repeated row.
    pub fn check_permutation(&self) -> core::result::Result<(), usize> {
        let mut seen = vec![false; self.order.len()];
        for (slot, &r) in self.order.iter().enumerate() {
            if r >= seen.len() || seen[r] {
                return Err(slot);
            }
            seen[r] = true;
        }
        Ok(())
    }

    pub fn into_order(self) -> Vec<usize> {
        self.order
    }
}

/// Row indices sorted by descending row length, ties by ascending index.
/// Consecutive slots therefore bundle rows of similar length, and the
/// heaviest bundles are dispatched first.
pub fn build_row_swizzle<T: Element, I: SparseIndex>(m: &CsrMatrix<T, I>) -> RowSwizzle {
    let mut order: Vec<usize> = (0..m.rows()).collect();
    // stable: equal lengths keep ascending row order
    order.sort_by_key(|&r| core::cmp::Reverse(m.row_len(r)));
    RowSwizzle { order }
}
