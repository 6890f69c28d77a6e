use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use super::{CsrMatrix, DenseMatrix};
use crate::error::{Result, SparseError};

/// How nonzeros are spread over rows by [`random_csr`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowProfile {
    /// Positions drawn uniformly without replacement over the whole matrix.
    Uniform,
    /// Row lengths follow a lognormal whose coefficient of variation is
    /// `cov_target`, rescaled to the exact total and clamped to `[0, cols]`.
    LogNormal { cov_target: f64 },
}

/// Seeded random sparse matrix with `round((1 - sparsity) * rows * cols)`
/// nonzeros. Values are uniform in `[-1, 1)`.
pub fn random_csr(rows: usize, cols: usize, sparsity: f64, seed: u64, profile: RowProfile) -> Result<CsrMatrix<f32>> {
    if !(0.0..1.0).contains(&sparsity) {
        return Err(SparseError::InvalidArgument("sparsity must be in [0, 1)"));
    }
    if cols > 0 && u32::try_from(cols - 1).is_err() {
        return Err(SparseError::IndexOverflow {
            value: cols,
            max: u32::MAX as usize,
            width: crate::IndexWidth::U32,
        });
    }
    let positions = rows
        .checked_mul(cols)
        .ok_or(SparseError::InvalidArgument("rows * cols overflows"))?;
    let total = libm::round((1.0 - sparsity) * positions as f64) as usize;
    let total = total.min(positions);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut row_offsets = Vec::with_capacity(rows + 1);
    row_offsets.push(0);
    let mut col_indices: Vec<u32> = Vec::with_capacity(total);

    match profile {
        RowProfile::Uniform => {
            let mut picked = index::sample(&mut rng, positions, total).into_vec();
            picked.sort_unstable();
            let mut it = picked.into_iter().peekable();
            for r in 0..rows {
                let end = (r + 1) * cols;
                while let Some(&p) = it.peek() {
                    if p >= end {
                        break;
                    }
                    col_indices.push((p - r * cols) as u32);
                    it.next();
                }
                row_offsets.push(col_indices.len());
            }
        }
        RowProfile::LogNormal { cov_target } => {
            let lengths = lognormal_row_lengths(rows, cols, total, cov_target, &mut rng)?;
            for len in lengths {
                let start = col_indices.len();
                col_indices.extend(index::sample(&mut rng, cols, len).iter().map(|c| c as u32));
                col_indices[start..].sort_unstable();
                row_offsets.push(col_indices.len());
            }
        }
    }

    let values = (0..col_indices.len()).map(|_| rng.random_range(-1.0f32..1.0)).collect();
    Ok(CsrMatrix::from_parts_unchecked(
        rows,
        cols,
        row_offsets,
        col_indices,
        values,
    ))
}

/// Seeded dense matrix with entries uniform in `[-1, 1)`.
pub fn random_dense(rows: usize, cols: usize, seed: u64) -> DenseMatrix<f32> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0f32..1.0))
}

/// Draws lognormal weights with the target CoV and water-fills `total`
/// nonzeros over them, so that no row exceeds `cols` and the sum is exact.
pub fn lognormal_row_lengths<R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    total: usize,
    cov_target: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if !(cov_target >= 0.0) || !cov_target.is_finite() {
        return Err(SparseError::InvalidArgument("cov target must be finite and >= 0"));
    }
    if total > rows.saturating_mul(cols) {
        return Err(SparseError::InvalidArgument("more nonzeros than positions"));
    }
    if rows == 0 {
        return Ok(Vec::new());
    }
    let weights: Vec<f64> = if cov_target == 0.0 {
        alloc::vec![1.0; rows]
    } else {
        let sigma2 = libm::log1p(cov_target * cov_target);
        let dist = LogNormal::new(-sigma2 / 2.0, libm::sqrt(sigma2))
            .map_err(|_| SparseError::InvalidArgument("invalid lognormal parameters"))?;
        (0..rows).map(|_| dist.sample(rng)).collect()
    };

    let cap = cols as f64;
    let filled = |scale: f64| -> f64 { weights.iter().map(|w| (scale * w).min(cap)).sum() };
    let min_w = weights
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
        .max(f64::MIN_POSITIVE);
    let (mut lo, mut hi) = (0.0, cap / min_w);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if filled(mid) >= total as f64 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let ideal: Vec<f64> = weights.iter().map(|w| (hi * w).min(cap)).collect();
    let mut lengths: Vec<usize> = ideal.iter().map(|&x| libm::floor(x) as usize).collect();
    let assigned: usize = lengths.iter().sum();

    // Largest-remainder rounding to hit the total exactly.
    let mut order: Vec<usize> = (0..rows).collect();
    if assigned < total {
        order.sort_by(|&a, &b| {
            let fa = ideal[a] - lengths[a] as f64;
            let fb = ideal[b] - lengths[b] as f64;
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        let mut need = total - assigned;
        while need > 0 {
            let mut progressed = false;
            for &r in &order {
                if need == 0 {
                    break;
                }
                if lengths[r] < cols {
                    lengths[r] += 1;
                    need -= 1;
                    progressed = true;
                }
            }
            debug_assert!(progressed);
            if !progressed {
                break;
            }
        }
    } else if assigned > total {
        order.sort_by(|&a, &b| {
            let fa = ideal[a] - lengths[a] as f64;
            let fb = ideal[b] - lengths[b] as f64;
            fa.total_cmp(&fb).then(a.cmp(&b))
        });
        let mut excess = assigned - total;
        while excess > 0 {
            for &r in &order {
                if excess == 0 {
                    break;
                }
                if lengths[r] > 0 {
                    lengths[r] -= 1;
                    excess -= 1;
                }
            }
        }
    }
    Ok(lengths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::compute_stats;

    #[test]
    fn dense_generator_is_seeded_and_bounded() {
        let a = random_dense(4, 6, 9);
        assert!(a.bit_eq(&random_dense(4, 6, 9)));
        assert!(!a.bit_eq(&random_dense(4, 6, 10)));
        assert!(a.data().iter().all(|v| (-1.0..1.0).contains(v)));
    }

    #[test]
    fn zero_sparsity_is_dense() {
        let m = random_csr(5, 7, 0.0, 1, RowProfile::Uniform).unwrap();
        assert_eq!(m.nnz(), 35);
        assert!(m.row_lengths().all(|l| l == 7));
        assert!(m.validate().is_ok());
    }

    #[test]
    fn seeded_determinism() {
        for profile in [RowProfile::Uniform, RowProfile::LogNormal { cov_target: 0.7 }] {
            let a = random_csr(50, 40, 0.8, 42, profile).unwrap();
            let b = random_csr(50, 40, 0.8, 42, profile).unwrap();
            assert_eq!(a, b);
            let c = random_csr(50, 40, 0.8, 43, profile).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn uniform_count_is_exact() {
        let m = random_csr(100, 30, 0.9, 7, RowProfile::Uniform).unwrap();
        assert_eq!(m.nnz(), 300);
        assert!(m.validate().is_ok());
    }

    #[test]
    fn lognormal_hits_target_cov() {
        let m = random_csr(1000, 1000, 0.9, 2024, RowProfile::LogNormal { cov_target: 1.0 }).unwrap();
        assert!(m.validate().is_ok());
        assert_eq!(m.nnz(), 100_000);
        let cov = compute_stats(&m).row_cov.unwrap();
        assert!((cov - 1.0).abs() <= 0.15, "cov {cov}");
    }

    #[test]
    fn lognormal_zero_cov_rounds() {
        // mean row length 2.5: half the rows get 3, half get 2
        let m = random_csr(4, 10, 0.75, 9, RowProfile::LogNormal { cov_target: 0.0 }).unwrap();
        assert_eq!(m.nnz(), 10);
        let mut lengths: Vec<usize> = m.row_lengths().collect();
        lengths.sort();
        assert_eq!(lengths, [2, 2, 3, 3]);
    }

    #[test]
    fn lognormal_clamps_to_cols() {
        let m = random_csr(20, 8, 0.3, 5, RowProfile::LogNormal { cov_target: 3.0 }).unwrap();
        assert!(m.row_lengths().all(|l| l <= 8));
        assert_eq!(m.nnz(), 112);
    }

    #[test]
    fn bad_sparsity_rejected() {
        assert!(random_csr(2, 2, 1.0, 0, RowProfile::Uniform).is_err());
        assert!(random_csr(2, 2, -0.1, 0, RowProfile::Uniform).is_err());
        assert!(random_csr(2, 2, 0.5, 0, RowProfile::LogNormal { cov_target: -1.0 }).is_err());
    }
}
