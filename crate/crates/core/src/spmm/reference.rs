use crate::element::{Element, SparseIndex};
use crate::error::{Result, SparseError};
use crate::matrix::{CsrMatrix, DenseMatrix};

/// Row-sequential CSR × dense product accumulated in `f64` and rounded once
/// to the output precision. This is the oracle the tiled kernels are
/// checked against.
pub fn spmm_reference<T: Element, I: SparseIndex>(a: &CsrMatrix<T, I>, b: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if a.cols() != b.rows() {
        return Err(SparseError::ShapeMismatch {
            op: "spmm_reference",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let n = b.cols();
    let mut c = DenseMatrix::zeros(a.rows(), n);
    let mut acc = alloc::vec![0f64; n];
    for row in 0..a.rows() {
        acc.iter_mut().for_each(|v| *v = 0.0);
        let (cols, vals) = a.row(row);
        for (&k, &v) in cols.iter().zip(vals) {
            let v = v.to_f32() as f64;
            for (o, &bv) in acc.iter_mut().zip(b.row(k.to_usize())) {
                *o += v * bv.to_f32() as f64;
            }
        }
        for (o, &s) in c.row_mut(row).iter_mut().zip(&acc) {
            *o = T::from_f64(s);
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{csr_to_dense, random_csr, RowProfile};
    use proptest::prelude::*;

    #[test]
    fn identity_times_b() {
        let a = CsrMatrix::<f32>::identity(3).unwrap();
        let b = DenseMatrix::from_fn(3, 4, |i, j| (i * 4 + j) as f32 * 0.37 - 1.0);
        assert!(spmm_reference(&a, &b).unwrap().bit_eq(&b));
    }

    #[test]
    fn empty_a_gives_zeros() {
        let a = CsrMatrix::<f32>::empty(2, 3);
        let b = DenseMatrix::from_fn(3, 2, |i, j| (i + j) as f32 + 1.0);
        assert_eq!(spmm_reference(&a, &b).unwrap().data(), &[0.0; 4]);
    }

    #[test]
    fn shape_mismatch() {
        let a = CsrMatrix::<f32>::empty(2, 3);
        let b = DenseMatrix::<f32>::zeros(2, 2);
        assert!(matches!(spmm_reference(&a, &b), Err(SparseError::ShapeMismatch { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        // Textbook dense triple loop in f64 as the independent oracle.
        #[test]
        fn matches_triple_loop(
            m in 1usize..20, k in 1usize..20, n in 1usize..20,
            s in 0.0f64..0.95, seed in any::<u64>()
        ) {
            let a = random_csr(m, k, s, seed, RowProfile::Uniform).unwrap();
            let b = DenseMatrix::from_fn(k, n, |i, j| ((i * 31 + j * 17) % 13) as f32 * 0.25 - 1.5);
            let ad = csr_to_dense(&a);
            let got = spmm_reference(&a, &b).unwrap();
            for i in 0..m {
                for j in 0..n {
                    let mut s = 0f64;
                    for p in 0..k {
                        s += ad.get(i, p) as f64 * b.get(p, j) as f64;
                    }
                    prop_assert!((got.get(i, j) as f64 - s).abs() <= 1e-6 * (1.0 + s.abs()));
                }
            }
        }
    }
}
