//! Error metrics used by tests, the `check` command and benchmark gates.
//!
//! Kernel results are compared element by element against an `f64`
//! evaluation of the same products. The error of an element is scaled by
//! the sum of absolute products that formed it, so cancellation in the
//! exact result does not inflate the reported error.

use alloc::vec;
use alloc::vec::Vec;

use crate::element::{Element, SparseIndex};
use crate::error::{Result, SparseError};
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::sddmm::SddmmProblem;

#[inline]
fn scaled_error(got: f64, exact: f64, magnitude: f64) -> f64 {
    let diff = (got - exact).abs();
    if diff == 0.0 {
        0.0
    } else if magnitude > 0.0 {
        diff / magnitude
    } else {
        f64::INFINITY
    }
}

/// Largest scaled error of `c` as an approximation of `a · b`.
pub fn spmm_relative_error<T: Element, I: SparseIndex, U: Element>(
    a: &CsrMatrix<T, I>,
    b: &DenseMatrix<T>,
    c: &DenseMatrix<U>,
) -> Result<f64> {
    if a.cols() != b.rows() || c.rows() != a.rows() || c.cols() != b.cols() {
        return Err(SparseError::ShapeMismatch {
            op: "spmm_relative_error",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    let n = b.cols();
    let mut exact = vec![0f64; n];
    let mut magnitude = vec![0f64; n];
    let mut worst = 0f64;
    for row in 0..a.rows() {
        exact.iter_mut().for_each(|v| *v = 0.0);
        magnitude.iter_mut().for_each(|v| *v = 0.0);
        let (cols, vals) = a.row(row);
        for (&k, &v) in cols.iter().zip(vals) {
            let v = v.to_f32() as f64;
            for (j, &bv) in b.row(k.to_usize()).iter().enumerate() {
                let p = v * bv.to_f32() as f64;
                exact[j] += p;
                magnitude[j] += p.abs();
            }
        }
        for (j, &got) in c.row(row).iter().enumerate() {
            worst = worst.max(scaled_error(got.to_f32() as f64, exact[j], magnitude[j]));
        }
    }
    Ok(worst)
}

/// Largest scaled error of `out` as the SDDMM of `p` (unscaled by pattern
/// values). Also fails if `out` does not share the pattern's structure.
pub fn sddmm_relative_error<T: Element, I: SparseIndex, U: Element>(
    p: &SddmmProblem<'_, T, I>,
    out: &CsrMatrix<U, I>,
) -> Result<f64> {
    let pattern = p.pattern();
    if !pattern.same_structure(out) {
        return Err(SparseError::InvalidArgument(
            "output structure differs from the pattern",
        ));
    }
    let mut worst = 0f64;
    for ((row, col, _), &got) in pattern.triplets().zip(out.values()) {
        let (mut exact, mut magnitude) = (0f64, 0f64);
        for (x, y) in p.a().row(row).iter().zip(p.b().row(col)) {
            let prod = x.to_f32() as f64 * y.to_f32() as f64;
            exact += prod;
            magnitude += prod.abs();
        }
        worst = worst.max(scaled_error(got.to_f32() as f64, exact, magnitude));
    }
    Ok(worst)
}

/// `max |got − want| / max |want|`; zero when both are all-zero.
pub fn normwise_relative_error(got: &[f32], want: &[f64]) -> f64 {
    assert_eq!(got.len(), want.len(), "length mismatch");
    let diff = got
        .iter()
        .zip(want)
        .map(|(&g, &w)| (g as f64 - w).abs())
        .fold(0.0, f64::max);
    let scale = want.iter().map(|w| w.abs()).fold(0.0, f64::max);
    if diff == 0.0 {
        0.0
    } else if scale > 0.0 {
        diff / scale
    } else {
        f64::INFINITY
    }
}

/// Spearman rank correlation with average ranks for ties. Returns `NaN`
/// when either input is constant or shorter than two.
pub fn spearman_rho(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "length mismatch");
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / libm::sqrt(sxx * syy)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{random_csr, RowProfile};
    use crate::spmm::spmm_reference;

    #[test]
    fn reference_has_tiny_error() {
        let a = random_csr(20, 30, 0.5, 1, RowProfile::Uniform).unwrap();
        let b = DenseMatrix::from_fn(30, 7, |i, j| (i as f32 - j as f32) * 0.1);
        let c = spmm_reference(&a, &b).unwrap();
        assert!(spmm_relative_error(&a, &b, &c).unwrap() < 1e-7);
    }

    #[test]
    fn detects_a_wrong_element() {
        let a = CsrMatrix::<f32>::identity(2).unwrap();
        let b = DenseMatrix::from_rows(&[[1.0f32, 2.0], [3.0, 4.0]]).unwrap();
        let mut c = b.clone();
        c.set(1, 1, 4.5);
        assert_eq!(spmm_relative_error(&a, &b, &c).unwrap(), 0.125);
    }

    #[test]
    fn zero_magnitude_needs_exact_zero() {
        assert_eq!(scaled_error(0.0, 0.0, 0.0), 0.0);
        assert!(scaled_error(1e-30, 0.0, 0.0).is_infinite());
    }

    #[test]
    fn normwise() {
        assert_eq!(normwise_relative_error(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(normwise_relative_error(&[1.0, 3.0], &[1.0, 2.0]), 0.5);
    }

    #[test]
    fn spearman() {
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[10.0, 20.0, 25.0]), 1.0);
        assert_eq!(spearman_rho(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        assert!(spearman_rho(&[1.0, 2.0], &[5.0, 5.0]).is_nan());
        // ties get average ranks: y ranks [1.5, 1.5, 3]
        let r = spearman_rho(&[1.0, 2.0, 3.0], &[1.0, 1.0, 2.0]);
        assert!((r - 0.866_025_403_784_438_6).abs() < 1e-12);
    }
}
