//! Sparse attention: `softmax(Q·Kᵀ / √d_k) · V` evaluated only at the
//! positions of a mask, as an SDDMM, a sparse softmax and an SpMM.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::element::{Element, SparseIndex};
use crate::error::{Result, SparseError};
use crate::exec::{DisjointWriter, Executor};
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::sddmm::{sddmm_with, SddmmOptions, SddmmProblem};
use crate::spmm::{default_tile_config, spmm_with, KernelKind, SpmmOptions, TileConfig};
use crate::Sequential;

/// Band-plus-random attention mask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttentionMaskSpec {
    pub seq_len: usize,
    /// Width of the dense band ending at (and including) the diagonal.
    pub band: usize,
    /// Fraction of off-band positions left out, on average.
    pub off_diag_sparsity: f64,
    pub seed: u64,
    /// When false the band and the sampled positions extend to both sides.
    pub causal: bool,
}

impl AttentionMaskSpec {
    pub fn new(seq_len: usize, band: usize, off_diag_sparsity: f64, seed: u64) -> Self {
        Self {
            seq_len,
            band,
            off_diag_sparsity,
            seed,
            causal: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.band == 0 {
            return Err(SparseError::InvalidArgument("band must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.off_diag_sparsity) {
            return Err(SparseError::InvalidArgument("off-diagonal sparsity must be in [0, 1]"));
        }
        if self.seq_len > 0 && u32::try_from(self.seq_len - 1).is_err() {
            return Err(SparseError::InvalidArgument("sequence too long for 32-bit indices"));
        }
        Ok(())
    }
}

/// Builds the mask described by `spec`; stored values are 1.0.
///
/// Row `i` keeps the band `j ∈ [i − band + 1, i]`. Each earlier position is
/// kept with probability `min(1, p_i / (i − j))`, where `p_i` is chosen so
/// the expected number kept is `(1 − off_diag_sparsity)` times the number of
/// off-band positions in the row.
pub fn generate_mask(spec: &AttentionMaskSpec) -> Result<CsrMatrix<f32>> {
    spec.validate()?;
    let n = spec.seq_len;
    let density = 1.0 - spec.off_diag_sparsity;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut indices: Vec<u32> = Vec::new();
    // Σ 1/d over the off-band distances band..=i of the current row
    let mut inv_sum = 0.0f64;
    for i in 0..n {
        let band_start = (i + 1).saturating_sub(spec.band);
        if band_start > 0 {
            // distances band..=i; only distance i is new for this row
            inv_sum += 1.0 / i as f64;
        }
        let scale = if band_start > 0 {
            density * band_start as f64 / inv_sum
        } else {
            0.0
        };
        let sample = |j: usize, rng: &mut ChaCha8Rng, out: &mut Vec<u32>| {
            let dist = i.abs_diff(j) as f64;
            let p = (scale / dist).clamp(0.0, 1.0);
            if rng.random::<f64>() < p {
                out.push(j as u32);
            }
        };
        for j in 0..band_start {
            sample(j, &mut rng, &mut indices);
        }
        let band_end = if spec.causal { i + 1 } else { (i + spec.band).min(n) };
        indices.extend((band_start..band_end).map(|j| j as u32));
        if !spec.causal {
            // mirrored probabilities on the upper side
            let upper = n.saturating_sub(band_end);
            let upper_scale = if upper > 0 {
                let s: f64 = (spec.band..spec.band + upper).map(|d| 1.0 / d as f64).sum();
                density * upper as f64 / s
            } else {
                0.0
            };
            for j in band_end..n {
                let p = (upper_scale / (j - i) as f64).clamp(0.0, 1.0);
                if rng.random::<f64>() < p {
                    indices.push(j as u32);
                }
            }
        }
        offsets.push(indices.len());
    }
    let nnz = indices.len();
    Ok(CsrMatrix::from_parts_unchecked(
        n,
        n,
        offsets,
        indices,
        alloc::vec![1.0; nnz],
    ))
}

/// Row-wise `exp(scale·v − max) / Σ` on the stored values. Empty rows stay
/// empty; the structure is unchanged.
pub fn sparse_softmax<T: Element, I: SparseIndex>(m: &CsrMatrix<T, I>, scale: f32) -> CsrMatrix<T, I> {
    sparse_softmax_with(&Sequential, m, scale)
}

pub fn sparse_softmax_with<T, I, E>(exec: &E, m: &CsrMatrix<T, I>, scale: f32) -> CsrMatrix<T, I>
where
    T: Element,
    I: SparseIndex,
    E: Executor + ?Sized,
{
    let mut out = m.clone();
    {
        let src = m.values();
        let writer = DisjointWriter::new(out.values_mut());
        exec.for_each_task(m.rows(), &|row| {
            let range = m.row_range(row);
            if range.is_empty() {
                return;
            }
            let scaled = |v: T| scale as f64 * v.to_f32() as f64;
            let vals = &src[range.clone()];
            let max = vals.iter().map(|&v| scaled(v)).fold(f64::NEG_INFINITY, f64::max);
            let sum: f64 = vals.iter().map(|&v| libm::exp(scaled(v) - max)).sum();
            for (pos, &v) in range.zip(vals) {
                let p = libm::exp(scaled(v) - max) / sum;
                // SAFETY: each row's value range is written only by its own task.
                unsafe { writer.write_one(pos, T::from_f64(p)) };
            }
        });
    }
    out
}

/// Tile shapes for the two kernels of the pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttentionConfig {
    pub scores: TileConfig,
    pub output: TileConfig,
}

impl AttentionConfig {
    /// Default tiles for head widths `dk` (queries/keys) and `dv` (values).
    pub fn for_dims(dk: usize, dv: usize) -> Self {
        Self {
            scores: default_tile_config(dk, KernelKind::Sddmm),
            output: default_tile_config(dv, KernelKind::Spmm),
        }
    }
}

/// Single-head sparse attention on the calling thread.
pub fn sparse_attention<T: Element, I: SparseIndex>(
    q: &DenseMatrix<T>,
    k: &DenseMatrix<T>,
    v: &DenseMatrix<T>,
    mask: &CsrMatrix<T, I>,
    cfg: &AttentionConfig,
) -> Result<DenseMatrix<T>> {
    sparse_attention_with(&Sequential, q, k, v, mask, cfg)
}

pub fn sparse_attention_with<T, I, E>(
    exec: &E,
    q: &DenseMatrix<T>,
    k: &DenseMatrix<T>,
    v: &DenseMatrix<T>,
    mask: &CsrMatrix<T, I>,
    cfg: &AttentionConfig,
) -> Result<DenseMatrix<T>>
where
    T: Element,
    I: SparseIndex,
    E: Executor + ?Sized,
{
    if v.rows() != k.rows() {
        return Err(SparseError::ShapeMismatch {
            op: "sparse_attention",
            left_rows: k.rows(),
            left_cols: k.cols(),
            right_rows: v.rows(),
            right_cols: v.cols(),
        });
    }
    let problem = SddmmProblem::new(q, k, mask)?;
    let scores = sddmm_with(exec, &problem, cfg.scores, &SddmmOptions::default())?;
    let scale = 1.0 / libm::sqrtf(q.cols().max(1) as f32);
    let probs = sparse_softmax_with(exec, &scores, scale);
    spmm_with(exec, &probs, v, cfg.output, &SpmmOptions::default())
}

/// Dense masked attention in `f64`, row-major `seq_len × dv`: every query
/// attends to the key positions stored in its mask row. Rows with an empty
/// mask produce zeros.
pub fn attention_reference<T: Element, I: SparseIndex>(
    q: &DenseMatrix<T>,
    k: &DenseMatrix<T>,
    v: &DenseMatrix<T>,
    mask: &CsrMatrix<T, I>,
) -> Result<Vec<f64>> {
    if q.cols() != k.cols() || v.rows() != k.rows() || mask.rows() != q.rows() || mask.cols() != k.rows() {
        return Err(SparseError::ShapeMismatch {
            op: "attention_reference",
            left_rows: q.rows(),
            left_cols: q.cols(),
            right_rows: k.rows(),
            right_cols: k.cols(),
        });
    }
    let dv = v.cols();
    let scale = 1.0 / libm::sqrt(q.cols().max(1) as f64);
    let mut out = alloc::vec![0f64; q.rows() * dv];
    for row in 0..q.rows() {
        let (cols, _) = mask.row(row);
        let scores: Vec<f64> = cols
            .iter()
            .map(|c| {
                let dot: f64 = q
                    .row(row)
                    .iter()
                    .zip(k.row(c.to_usize()))
                    .map(|(&x, &y)| x.to_f32() as f64 * y.to_f32() as f64)
                    .sum();
                dot * scale
            })
            .collect();
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights: Vec<f64> = scores.iter().map(|s| libm::exp(s - max)).collect();
        let total: f64 = weights.iter().sum();
        let dst = &mut out[row * dv..(row + 1) * dv];
        for (c, w) in cols.iter().zip(&weights) {
            for (o, &x) in dst.iter_mut().zip(v.row(c.to_usize())) {
                *o += w / total * x.to_f32() as f64;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use alloc::vec;

    use super::*;
    use proptest::prelude::*;

    fn rows_of(m: &CsrMatrix<f32>) -> Vec<Vec<u32>> {
        (0..m.rows()).map(|r| m.row(r).0.to_vec()).collect()
    }

    #[test]
    fn small_band_enumeration() {
        let m = generate_mask(&AttentionMaskSpec::new(4, 2, 1.0, 0)).unwrap();
        assert_eq!(rows_of(&m), vec![vec![0], vec![0, 1], vec![1, 2], vec![2, 3]]);
        assert_eq!(m.nnz(), 7);
    }

    #[test]
    fn wide_band_is_lower_triangle() {
        for n in [1, 5, 17] {
            let m = generate_mask(&AttentionMaskSpec::new(n, n + 3, 0.5, 1)).unwrap();
            assert_eq!(m.nnz(), n * (n + 1) / 2);
        }
    }

    #[test]
    fn zero_sparsity_keeps_everything_near_band() {
        // p_i / (i - j) reaches 1 only close to the band; the expected row
        // count is still (i - band + 1) before clamping.
        let m = generate_mask(&AttentionMaskSpec::new(64, 4, 0.0, 2)).unwrap();
        assert!(m.validate().is_ok());
        for (r, c, _) in m.triplets() {
            assert!(c <= r);
        }
    }

    #[test]
    fn off_band_density_matches_target() {
        let spec = AttentionMaskSpec::new(1024, 64, 0.9, 7);
        let m = generate_mask(&spec).unwrap();
        let band_nnz: usize = (0..1024usize).map(|i| i.min(63) + 1).sum();
        let off_positions: usize = (0..1024usize).map(|i| (i + 1).saturating_sub(64)).sum();
        let density = (m.nnz() - band_nnz) as f64 / off_positions as f64;
        assert!((density - 0.1).abs() < 0.01, "{density}");
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate_mask(&AttentionMaskSpec::new(200, 8, 0.8, 3)).unwrap();
        let b = generate_mask(&AttentionMaskSpec::new(200, 8, 0.8, 3)).unwrap();
        let c = generate_mask(&AttentionMaskSpec::new(200, 8, 0.8, 4)).unwrap();
        assert_eq!(a.col_indices(), b.col_indices());
        assert_ne!(a.col_indices(), c.col_indices());
    }

    #[test]
    fn non_causal_is_valid_and_two_sided() {
        let spec = AttentionMaskSpec {
            causal: false,
            ..AttentionMaskSpec::new(50, 3, 0.5, 9)
        };
        let m = generate_mask(&spec).unwrap();
        assert!(m.validate().is_ok());
        assert!(m.triplets().any(|(r, c, _)| c > r + 2));
        assert_eq!(m.row(0).0[..3], [0, 1, 2]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate_mask(&AttentionMaskSpec::new(4, 0, 0.5, 0)).is_err());
        assert!(generate_mask(&AttentionMaskSpec::new(4, 2, 1.5, 0)).is_err());
    }

    #[test]
    fn softmax_hand_values() {
        let m = CsrMatrix::<f32>::from_parts(3, 2, vec![0, 2, 3, 3], vec![0, 1, 1], vec![0.0, 0.0, 5.0]).unwrap();
        let s = sparse_softmax(&m, 1.0);
        assert_eq!(s.values(), &[0.5, 0.5, 1.0]);

        let m = CsrMatrix::<f32>::from_parts(1, 2, vec![0, 2], vec![0, 1], vec![core::f32::consts::LN_2, 0.0]).unwrap();
        let s = sparse_softmax(&m, 1.0);
        assert!((s.values()[0] - 2.0 / 3.0).abs() < 1e-7);
        assert!((s.values()[1] - 1.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn singleton_attention_returns_v() {
        let q = DenseMatrix::from_rows(&[[0.3f32, -1.0]]).unwrap();
        let k = DenseMatrix::from_rows(&[[2.0f32, 0.5]]).unwrap();
        let v = DenseMatrix::from_rows(&[[4.0f32, 5.0, 6.0]]).unwrap();
        let mask = generate_mask(&AttentionMaskSpec::new(1, 1, 1.0, 0)).unwrap();
        let out = sparse_attention(&q, &k, &v, &mask, &AttentionConfig::for_dims(2, 3)).unwrap();
        assert_eq!(out.data(), v.data());
    }

    #[test]
    fn identical_keys_average_visible_values() {
        let l = 12;
        let q = DenseMatrix::from_fn(l, 4, |_, j| j as f32 * 0.5);
        let v = DenseMatrix::from_fn(l, 3, |i, j| (i * 3 + j) as f32);
        let mask = generate_mask(&AttentionMaskSpec::new(l, 4, 1.0, 0)).unwrap();
        let out = sparse_attention(&q, &q, &v, &mask, &AttentionConfig::for_dims(4, 3)).unwrap();
        for i in 0..l {
            let lo = (i + 1).saturating_sub(4);
            for j in 0..3 {
                let want = (lo..=i).map(|r| v.get(r, j)).sum::<f32>() / (i - lo + 1) as f32;
                assert!((out.get(i, j) - want).abs() <= 1e-5 * want.abs().max(1.0));
            }
        }
    }

    #[test]
    fn pipeline_matches_dense_oracle() {
        use crate::matrix::random_dense;
        use crate::verify::normwise_relative_error;
        for l in [1, 7, 33] {
            let mask = generate_mask(&AttentionMaskSpec::new(l, 3, 0.5, l as u64)).unwrap();
            let q = random_dense(l, 16, 1);
            let k = random_dense(l, 16, 2);
            let v = random_dense(l, 8, 3);
            let got = sparse_attention(&q, &k, &v, &mask, &AttentionConfig::for_dims(16, 8)).unwrap();
            let want = attention_reference(&q, &k, &v, &mask).unwrap();
            assert!(normwise_relative_error(got.data(), &want) <= 1e-5);
        }
    }

    #[test]
    fn attention_shape_errors() {
        let q = DenseMatrix::<f32>::zeros(3, 2);
        let v = DenseMatrix::<f32>::zeros(2, 2);
        let mask = generate_mask(&AttentionMaskSpec::new(3, 3, 1.0, 0)).unwrap();
        assert!(sparse_attention(&q, &q, &v, &mask, &AttentionConfig::for_dims(2, 2)).is_err());
    }

    proptest! {
        #[test]
        fn softmax_rows_sum_to_one_and_shift_invariant(
            raw in proptest::collection::vec(-20_480i32..20_480, 1..64),
            shift in -50i32..50,
            scale in 0.1f32..2.0,
        ) {
            // multiples of 1/1024 so that adding the shift is exact
            let vals: Vec<f32> = raw.iter().map(|&v| v as f32 / 1024.0).collect();
            let shift = shift as f32;
            let n = vals.len();
            let m = CsrMatrix::<f32>::from_parts(1, n, vec![0, n], (0..n as u32).collect(), vals.clone()).unwrap();
            let s = sparse_softmax(&m, scale);
            let sum: f64 = s.values().iter().map(|&v| v as f64).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-6);
            prop_assert!(s.values().iter().all(|&v| v > 0.0 && v <= 1.0));
            let shifted = m.map_values(|v| v + shift);
            let t = sparse_softmax(&shifted, scale);
            for (a, b) in s.values().iter().zip(t.values()) {
                prop_assert!((a - b).abs() <= 1e-6);
            }
        }
    }
}
