use super::CsrMatrix;
use crate::element::{Element, SparseIndex};

/// Row-length and density statistics of a sparse matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatrixStats {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    /// `1 - nnz / (rows * cols)`; zero for a matrix with no positions.
    pub sparsity: f64,
    pub avg_row_length: f64,
    /// Population standard deviation of row lengths over their mean.
    /// `None` when the matrix has no nonzeros.
    pub row_cov: Option<f64>,
    pub min_row_length: usize,
    pub max_row_length: usize,
}

pub fn compute_stats<T: Element, I: SparseIndex>(m: &CsrMatrix<T, I>) -> MatrixStats {
    row_length_stats(m.rows(), m.cols(), m.row_lengths())
}

/// Statistics from row lengths alone.
pub fn row_length_stats(rows: usize, cols: usize, lengths: impl Iterator<Item = usize> + Clone) -> MatrixStats {
    let nnz: usize = lengths.clone().sum();
    let positions = rows as f64 * cols as f64;
    let sparsity = if positions > 0.0 {
        1.0 - nnz as f64 / positions
    } else {
        0.0
    };
    let mean = if rows > 0 { nnz as f64 / rows as f64 } else { 0.0 };
    let row_cov = (nnz > 0).then(|| {
        let var = lengths
            .clone()
            .map(|l| {
                let d = l as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / rows as f64;
        libm::sqrt(var) / mean
    });
    MatrixStats {
        rows,
        cols,
        nnz,
        sparsity,
        avg_row_length: mean,
        row_cov,
        min_row_length: lengths.clone().min().unwrap_or(0),
        max_row_length: lengths.max().unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn with_lengths(lengths: &[usize], cols: usize) -> CsrMatrix<f32> {
        let mut offsets = vec![0];
        let mut idx = vec![];
        for &l in lengths {
            idx.extend(0..l as u32);
            offsets.push(idx.len());
        }
        let n = idx.len();
        CsrMatrix::from_parts(lengths.len(), cols, offsets, idx, vec![1.0; n]).unwrap()
    }

    #[test]
    fn single_nonzero_sparsity() {
        let m = CsrMatrix::<f32>::from_parts(2, 2, vec![0, 1, 1], vec![1], vec![3.0]).unwrap();
        assert_eq!(compute_stats(&m).sparsity, 0.75);
    }

    #[test]
    fn equal_rows_have_zero_cov() {
        let s = compute_stats(&with_lengths(&[2, 2, 2], 4));
        assert_eq!(s.row_cov, Some(0.0));
        assert_eq!(s.avg_row_length, 2.0);
    }

    #[test]
    fn population_cov() {
        let s = compute_stats(&with_lengths(&[1, 3], 4));
        assert_eq!(s.avg_row_length, 2.0);
        assert_eq!(s.row_cov, Some(0.5));
        assert_eq!((s.min_row_length, s.max_row_length), (1, 3));
    }

    #[test]
    fn empty_matrix_has_no_cov() {
        let s = compute_stats(&CsrMatrix::<f32>::empty(3, 3));
        assert_eq!(s.row_cov, None);
        assert_eq!(s.sparsity, 1.0);
    }

    #[test]
    fn single_row_cov_zero() {
        assert_eq!(compute_stats(&with_lengths(&[5], 8)).row_cov, Some(0.0));
    }
}
