use alloc::vec::Vec;

use super::{CsrMatrix, DenseMatrix};
use crate::element::{Element, SparseIndex};
use crate::error::{Result, SparseError};

/// Drops every entry with `|v| <= zero_threshold`.
pub fn csr_from_dense<T: Element, I: SparseIndex>(d: &DenseMatrix<T>, zero_threshold: f32) -> Result<CsrMatrix<T, I>> {
    if !(zero_threshold >= 0.0) {
        return Err(SparseError::InvalidArgument("zero threshold must be non-negative"));
    }
    if d.cols() > 0 && I::from_usize(d.cols() - 1).is_none() {
        return Err(SparseError::IndexOverflow {
            value: d.cols(),
            max: I::MAX_EXTENT,
            width: I::WIDTH,
        });
    }
    let mut row_offsets = Vec::with_capacity(d.rows() + 1);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    row_offsets.push(0);
    for i in 0..d.rows() {
        for (j, &v) in d.row(i).iter().enumerate() {
            if libm::fabsf(v.to_f32()) > zero_threshold {
                // cols - 1 fits, checked above
                col_indices.push(I::from_usize(j).unwrap());
                values.push(v);
            }
        }
        row_offsets.push(col_indices.len());
    }
    CsrMatrix::from_parts(d.rows(), d.cols(), row_offsets, col_indices, values)
}

pub fn csr_to_dense<T: Element, I: SparseIndex>(m: &CsrMatrix<T, I>) -> DenseMatrix<T> {
    let mut d = DenseMatrix::zeros(m.rows(), m.cols());
    for (r, c, v) in m.triplets() {
        d.set(r, c, v);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn diagonal_from_dense() {
        let d = DenseMatrix::from_rows(&[[1.0f32, 0.0], [0.0, 2.0]]).unwrap();
        let m: CsrMatrix = csr_from_dense(&d, 0.0).unwrap();
        assert_eq!(m.row_offsets(), &[0, 1, 2]);
        assert_eq!(m.col_indices(), &[0, 1]);
        assert_eq!(m.values(), &[1.0, 2.0]);
    }

    #[test]
    fn all_zero() {
        let d = DenseMatrix::<f32>::zeros(3, 3);
        let m: CsrMatrix = csr_from_dense(&d, 0.0).unwrap();
        assert_eq!(m.row_offsets(), &[0, 0, 0, 0]);
        assert!(m.col_indices().is_empty());
        assert!(m.values().is_empty());
    }

    #[test]
    fn threshold_drops_small_entries() {
        let d = DenseMatrix::from_rows(&[[0.1f32, 0.0], [0.0, 0.3]]).unwrap();
        let m: CsrMatrix = csr_from_dense(&d, 0.2).unwrap();
        assert_eq!(m.triplets().collect::<Vec<_>>(), [(1, 1, 0.3)]);
    }

    #[test]
    fn negative_threshold_rejected() {
        let d = DenseMatrix::<f32>::zeros(1, 1);
        assert!(csr_from_dense::<f32, u32>(&d, -1.0).is_err());
    }

    #[test]
    fn to_dense_fills_zeros() {
        let m = CsrMatrix::<f32>::empty(2, 2);
        assert_eq!(csr_to_dense(&m).data(), &[0.0; 4]);
        let m =
            CsrMatrix::<f32>::from_parts(2, 2, alloc::vec![0, 1, 2], alloc::vec![0, 1], alloc::vec![5.0, 7.0]).unwrap();
        assert_eq!(csr_to_dense(&m).data(), &[5.0, 0.0, 0.0, 7.0]);
    }

    fn sparse_dense() -> impl Strategy<Value = DenseMatrix<f32>> {
        (1usize..=64, 1usize..=64).prop_flat_map(|(r, c)| {
            proptest::collection::vec(prop_oneof![3 => Just(0.0f32), 1 => -1e6f32..1e6f32], r * c)
                .prop_map(move |data| DenseMatrix::from_vec(r, c, data).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn dense_round_trip(d in sparse_dense()) {
            let m: CsrMatrix = csr_from_dense(&d, 0.0).unwrap();
            prop_assert!(m.validate().is_ok());
            prop_assert!(csr_to_dense(&m).bit_eq(&d));
        }
    }
}
