//! CSR transpose as a cached structure plus a value gather.
//!
//! Sparse topologies in training change rarely, so the transposed row
//! offsets and column indices are computed once. Each later transpose of
//! updated values is a single gather through `value_perm`.

use alloc::vec;
use alloc::vec::Vec;

use super::CsrMatrix;
use crate::element::{Element, SparseIndex};
use crate::error::{Result, SparseError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransposePlan<I = u32> {
    rows: usize,
    cols: usize,
    t_row_offsets: Vec<usize>,
    t_col_indices: Vec<I>,
    value_perm: Vec<usize>,
}

impl<I: SparseIndex> TransposePlan<I> {
    pub fn t_row_offsets(&self) -> &[usize] {
        &self.t_row_offsets
    }

    pub fn t_col_indices(&self) -> &[I] {
        &self.t_col_indices
    }

    /// `transposed.values[p] == source.values[value_perm[p]]`.
    pub fn value_perm(&self) -> &[usize] {
        &self.value_perm
    }
}

/// Computes the structure of `mᵀ` with a stable counting sort by column.
pub fn transpose_plan<T: Element, I: SparseIndex>(m: &CsrMatrix<T, I>) -> Result<TransposePlan<I>> {
    // Transposed column indices are source rows.
    if m.rows() > 0 && I::from_usize(m.rows() - 1).is_none() {
        return Err(SparseError::IndexOverflow {
            value: m.rows(),
            max: I::MAX_EXTENT,
            width: I::WIDTH,
        });
    }
    let nnz = m.nnz();
    let mut t_row_offsets = vec![0usize; m.cols() + 1];
    for &c in m.col_indices() {
        t_row_offsets[c.to_usize() + 1] += 1;
    }
    for i in 0..m.cols() {
        t_row_offsets[i + 1] += t_row_offsets[i];
    }

    let mut cursor = t_row_offsets.clone();
    let mut t_col_indices = vec![I::default(); nnz];
    let mut value_perm = vec![0usize; nnz];
    for row in 0..m.rows() {
        let r = I::from_usize(row).unwrap();
        for p in m.row_range(row) {
            let c = m.col_indices()[p].to_usize();
            let dst = cursor[c];
            cursor[c] += 1;
            t_col_indices[dst] = r;
            value_perm[dst] = p;
        }
    }
    Ok(TransposePlan {
        rows: m.rows(),
        cols: m.cols(),
        t_row_offsets,
        t_col_indices,
        value_perm,
    })
}

/// Gathers `m`'s values through a plan built for the same topology.
pub fn apply_transpose<T: Element, I: SparseIndex>(
    plan: &TransposePlan<I>,
    m: &CsrMatrix<T, I>,
) -> Result<CsrMatrix<T, I>> {
    if plan.rows != m.rows() || plan.cols != m.cols() || plan.value_perm.len() != m.nnz() {
        return Err(SparseError::TopologyMismatch {
            plan_rows: plan.rows,
            plan_cols: plan.cols,
            plan_nnz: plan.value_perm.len(),
            rows: m.rows(),
            cols: m.cols(),
            nnz: m.nnz(),
        });
    }
    let values = plan.value_perm.iter().map(|&p| m.values()[p]).collect();
    Ok(CsrMatrix::from_parts_unchecked(
        plan.cols,
        plan.rows,
        plan.t_row_offsets.clone(),
        plan.t_col_indices.clone(),
        values,
    ))
}

/// One-shot transpose.
pub fn transpose<T: Element, I: SparseIndex>(m: &CsrMatrix<T, I>) -> Result<CsrMatrix<T, I>> {
    apply_transpose(&transpose_plan(m)?, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{csr_to_dense, random_csr, RowProfile};
    use proptest::prelude::*;

    #[test]
    fn diagonal_is_its_own_transpose() {
        let m = CsrMatrix::<f32>::from_parts(3, 3, vec![0, 1, 2, 3], vec![0, 1, 2], vec![1.0, 2.0, 3.0]).unwrap();
        let t = transpose(&m).unwrap();
        assert_eq!(t, m);
    }

    #[test]
    fn two_element_hand_transpose() {
        // (0,2)=a, (1,0)=b  ->  (0,1)=b, (2,0)=a
        let (a, b) = (4.0f32, 9.0f32);
        let m = CsrMatrix::<f32>::from_parts(2, 3, vec![0, 1, 2], vec![2, 0], vec![a, b]).unwrap();
        let t = transpose(&m).unwrap();
        assert_eq!((t.rows(), t.cols()), (3, 2));
        assert_eq!(t.row_offsets(), &[0, 1, 1, 2]);
        assert_eq!(t.col_indices(), &[1, 0]);
        assert_eq!(t.values(), &[b, a]);
        assert_eq!(t.triplets().collect::<Vec<_>>(), [(0, 1, b), (2, 0, a)]);
    }

    #[test]
    fn plan_reused_after_value_update() {
        let mut m = random_csr(7, 5, 0.5, 3, RowProfile::Uniform).unwrap();
        let plan = transpose_plan(&m).unwrap();
        for v in m.values_mut() {
            *v *= -3.0;
        }
        let t = apply_transpose(&plan, &m).unwrap();
        assert!(csr_to_dense(&t).bit_eq(&csr_to_dense(&m).transpose()));
    }

    #[test]
    fn topology_mismatch_rejected() {
        let m = random_csr(4, 4, 0.5, 1, RowProfile::Uniform).unwrap();
        let plan = transpose_plan(&m).unwrap();
        let other = random_csr(4, 4, 0.25, 1, RowProfile::Uniform).unwrap();
        assert!(matches!(
            apply_transpose(&plan, &other),
            Err(SparseError::TopologyMismatch { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn involution_and_dense_agreement(
            rows in 1usize..40, cols in 1usize..40, s in 0.0f64..0.95, seed in any::<u64>()
        ) {
            let m = random_csr(rows, cols, s, seed, RowProfile::Uniform).unwrap();
            let t = transpose(&m).unwrap();
            prop_assert!(t.validate().is_ok());
            prop_assert!(csr_to_dense(&t).bit_eq(&csr_to_dense(&m).transpose()));
            prop_assert_eq!(transpose(&t).unwrap(), m);
        }
    }
}
