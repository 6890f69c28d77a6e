//! Sampled dense–dense multiplication: `A·Bᵀ` evaluated only at the stored
//! positions of a CSR pattern.
//!
//! Tasks cover strips of `block_items_x` consecutive nonzeros of one row.
//! The launch is sized for the densest possible row, so tasks whose strip
//! starts past the end of their row return immediately. Each dot product is
//! split across `vector_width` lanes that accumulate strided partial sums
//! and are then combined by a fixed pairwise tree.

use alloc::vec;

use crate::balance::RowSwizzle;
use crate::element::{Element, SparseIndex};
use crate::error::{Result, SparseError};
use crate::exec::{DisjointWriter, Executor};
use crate::matrix::{CsrMatrix, DenseMatrix};
use crate::spmm::{check_swizzle, TileConfig};
use crate::Sequential;

/// Operands of `A·Bᵀ ⊙ 𝕀[pattern]`. `b` is stored row-major with one row
/// per output column, so both operands are read along contiguous rows.
#[derive(Clone, Copy, Debug)]
pub struct SddmmProblem<'a, T: Element = f32, I: SparseIndex = u32> {
    a: &'a DenseMatrix<T>,
    b: &'a DenseMatrix<T>,
    pattern: &'a CsrMatrix<T, I>,
}

impl<'a, T: Element, I: SparseIndex> SddmmProblem<'a, T, I> {
    pub fn new(a: &'a DenseMatrix<T>, b: &'a DenseMatrix<T>, pattern: &'a CsrMatrix<T, I>) -> Result<Self> {
        let mismatch = |left_rows, left_cols, right_rows, right_cols| SparseError::ShapeMismatch {
            op: "sddmm",
            left_rows,
            left_cols,
            right_rows,
            right_cols,
        };
        if a.cols() != b.cols() {
            return Err(mismatch(a.rows(), a.cols(), b.rows(), b.cols()));
        }
        if pattern.rows() != a.rows() || pattern.cols() != b.rows() {
            return Err(mismatch(pattern.rows(), pattern.cols(), a.rows(), b.rows()));
        }
        Ok(Self { a, b, pattern })
    }

    pub fn a(&self) -> &'a DenseMatrix<T> {
        self.a
    }

    pub fn b(&self) -> &'a DenseMatrix<T> {
        self.b
    }

    pub fn pattern(&self) -> &'a CsrMatrix<T, I> {
        self.pattern
    }

    /// Shared inner dimension.
    pub fn depth(&self) -> usize {
        self.a.cols()
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SddmmOptions<'a> {
    /// Order in which rows are handed to tasks.
    pub swizzle: Option<&'a RowSwizzle>,
    /// Multiply each result by the pattern's stored value.
    pub scale_values: bool,
}

/// Values of `A·Bᵀ` at the pattern's positions, on the calling thread.
pub fn sddmm<T: Element, I: SparseIndex>(p: &SddmmProblem<'_, T, I>, cfg: TileConfig) -> Result<CsrMatrix<T, I>> {
    sddmm_with(&Sequential, p, cfg, &SddmmOptions::default())
}

/// Like [`sddmm`], optionally scaling by the pattern values (`A·Bᵀ ⊙ C`).
pub fn sddmm_general<T: Element, I: SparseIndex>(
    p: &SddmmProblem<'_, T, I>,
    scale_values: bool,
    cfg: TileConfig,
) -> Result<CsrMatrix<T, I>> {
    sddmm_with(
        &Sequential,
        p,
        cfg,
        &SddmmOptions {
            scale_values,
            ..Default::default()
        },
    )
}

pub fn sddmm_with<T, I, E>(
    exec: &E,
    p: &SddmmProblem<'_, T, I>,
    cfg: TileConfig,
    opts: &SddmmOptions<'_>,
) -> Result<CsrMatrix<T, I>>
where
    T: Element,
    I: SparseIndex,
    E: Executor + ?Sized,
{
    cfg.validate()?;
    let pattern = p.pattern;
    let swizzle = opts.swizzle.or(pattern.swizzle());
    if let Some(sw) = swizzle {
        check_swizzle(sw, pattern.rows())?;
    }
    let mut values = vec![T::ZERO; pattern.nnz()];
    {
        let kernel = SddmmKernel {
            p,
            cfg,
            order: swizzle.map(|s| s.order()),
            scale: opts.scale_values,
            strips: pattern.cols().div_ceil(cfg.block_items_x),
            out: DisjointWriter::new(&mut values),
        };
        let tasks = pattern.rows().div_ceil(cfg.block_items_y) * kernel.strips;
        exec.for_each_task(tasks, &|t| kernel.run_task(t));
    }
    Ok(CsrMatrix::from_parts_unchecked(
        pattern.rows(),
        pattern.cols(),
        pattern.row_offsets().to_vec(),
        pattern.col_indices().to_vec(),
        values,
    ))
}

struct SddmmKernel<'a, 'p, T: Element, I: SparseIndex> {
    p: &'a SddmmProblem<'p, T, I>,
    cfg: TileConfig,
    order: Option<&'a [usize]>,
    scale: bool,
    strips: usize,
    out: DisjointWriter<'a, T>,
}

impl<T: Element, I: SparseIndex> SddmmKernel<'_, '_, T, I> {
    fn run_task(&self, task: usize) {
        match self.cfg.vector_width {
            4 => self.run::<4>(task),
            2 => self.run::<2>(task),
            _ => self.run::<1>(task),
        }
    }

    fn run<const VW: usize>(&self, task: usize) {
        let pattern = self.p.pattern;
        let (group, strip) = (task / self.strips, task % self.strips);
        let first_slot = group * self.cfg.block_items_y;
        let last_slot = (first_slot + self.cfg.block_items_y).min(pattern.rows());
        for slot in first_slot..last_slot {
            let row = self.order.map_or(slot, |o| o[slot]);
            let range = pattern.row_range(row);
            let lo = range.start + strip * self.cfg.block_items_x;
            if lo >= range.end {
                continue;
            }
            let hi = (lo + self.cfg.block_items_x).min(range.end);
            let a_row = self.p.a.row(row);
            for pos in lo..hi {
                let col = pattern.col_indices()[pos].to_usize();
                let mut dot = lane_dot::<T, VW>(a_row, self.p.b.row(col));
                if self.scale {
                    dot *= pattern.values()[pos].to_f32();
                }
                // SAFETY: position `pos` belongs to exactly one (row, strip)
                // pair, and each pair is visited by exactly one task.
                unsafe { self.out.write_one(pos, T::from_f32(dot)) };
            }
        }
    }
}

/// Dot product with `VW` lane accumulators: element `k` goes to lane
/// `k % VW`, lanes are combined pairwise (lane i with lane i + width/2).
#[inline]
fn lane_dot<T: Element, const VW: usize>(a: &[T], b: &[T]) -> f32 {
    let mut lanes = [0f32; VW];
    let mut chunks_a = a.chunks_exact(VW);
    let mut chunks_b = b.chunks_exact(VW);
    for (ca, cb) in (&mut chunks_a).zip(&mut chunks_b) {
        for l in 0..VW {
            lanes[l] += ca[l].to_f32() * cb[l].to_f32();
        }
    }
    for (l, (x, y)) in chunks_a.remainder().iter().zip(chunks_b.remainder()).enumerate() {
        lanes[l] += x.to_f32() * y.to_f32();
    }
    let mut width = VW;
    while width > 1 {
        width /= 2;
        for l in 0..width {
            lanes[l] += lanes[l + width];
        }
    }
    lanes[0]
}

/// Per-nonzero dot products accumulated in `f64` and rounded once.
pub fn sddmm_reference<T: Element, I: SparseIndex>(p: &SddmmProblem<'_, T, I>) -> Result<CsrMatrix<T, I>> {
    let pattern = p.pattern;
    let mut values = alloc::vec::Vec::with_capacity(pattern.nnz());
    for (row, col, _) in pattern.triplets() {
        let dot: f64 =
            p.a.row(row)
                .iter()
                .zip(p.b.row(col))
                .map(|(x, y)| x.to_f32() as f64 * y.to_f32() as f64)
                .sum();
        values.push(T::from_f64(dot));
    }
    Ok(CsrMatrix::from_parts_unchecked(
        pattern.rows(),
        pattern.cols(),
        pattern.row_offsets().to_vec(),
        pattern.col_indices().to_vec(),
        values,
    ))
}

#[cfg(test)]
mod tests {
    use alloc::vec::Vec;

    use super::*;
    use crate::balance::build_row_swizzle;
    use crate::matrix::{random_csr, transpose, RowProfile};
    use crate::spmm::{default_tile_config, KernelKind};
    use proptest::prelude::*;

    fn dense(rows: usize, cols: usize, salt: usize) -> DenseMatrix<f32> {
        DenseMatrix::from_fn(rows, cols, |i, j| {
            ((i * 131 + j * 71 + salt * 13) % 97) as f32 / 48.5 - 1.0
        })
    }

    fn configs() -> Vec<TileConfig> {
        let mut v = Vec::new();
        for vw in [1, 2, 4] {
            for x in [vw, 8, 32] {
                for y in [1, 4] {
                    if let Ok(c) = TileConfig::new(8 * vw, x, y, vw) {
                        v.push(c);
                    }
                }
            }
        }
        v
    }

    #[test]
    fn identity_diagonal() {
        let i2 = DenseMatrix::<f32>::identity(2);
        let pat = CsrMatrix::<f32>::identity(2).unwrap();
        let p = SddmmProblem::new(&i2, &i2, &pat).unwrap();
        assert_eq!(
            sddmm(&p, default_tile_config(2, KernelKind::Sddmm)).unwrap().values(),
            &[1.0, 1.0]
        );
    }

    #[test]
    fn off_diagonal_is_zero() {
        let i2 = DenseMatrix::<f32>::identity(2);
        let pat = CsrMatrix::<f32>::from_parts(2, 2, vec![0, 1, 2], vec![1, 0], vec![1.0, 1.0]).unwrap();
        let p = SddmmProblem::new(&i2, &i2, &pat).unwrap();
        assert_eq!(
            sddmm(&p, default_tile_config(2, KernelKind::Sddmm)).unwrap().values(),
            &[0.0, 0.0]
        );
    }

    #[test]
    fn reference_small_cases() {
        let a = DenseMatrix::from_rows(&[[2.0f32]]).unwrap();
        let b = DenseMatrix::from_rows(&[[3.0f32]]).unwrap();
        let pat = CsrMatrix::<f32>::identity(1).unwrap();
        let p = SddmmProblem::new(&a, &b, &pat).unwrap();
        assert_eq!(sddmm_reference(&p).unwrap().values(), &[6.0]);

        let empty = CsrMatrix::<f32>::empty(1, 1);
        let p = SddmmProblem::new(&a, &b, &empty).unwrap();
        assert!(sddmm_reference(&p).unwrap().values().is_empty());
    }

    #[test]
    fn shape_errors() {
        let a = dense(3, 4, 0);
        let b = dense(5, 3, 0);
        let pat = CsrMatrix::<f32>::empty(3, 5);
        assert!(matches!(
            SddmmProblem::new(&a, &b, &pat),
            Err(SparseError::ShapeMismatch { .. })
        ));
        let b = dense(5, 4, 0);
        let pat = CsrMatrix::<f32>::empty(3, 4);
        assert!(matches!(
            SddmmProblem::new(&a, &b, &pat),
            Err(SparseError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn lane_tree_order() {
        let a = [1.0f32, 1e8, 1.0, -1e8, 3.0];
        let b = [1.0f32; 5];
        // lanes: l0 = 1 + 3, l1 = 1e8, l2 = 1, l3 = -1e8; (l0 + l2) + (l1 + l3)
        assert_eq!(lane_dot::<f32, 4>(&a, &b), 5.0);
        // sequential order loses the small terms to the large ones
        assert_eq!(lane_dot::<f32, 1>(&a, &b), 3.0);
    }

    #[test]
    fn scalar_config_matches_sequential_f32_bitwise() {
        let pat = random_csr(17, 23, 0.6, 1, RowProfile::Uniform).unwrap();
        let a = dense(17, 33, 1);
        let b = dense(23, 33, 2);
        let p = SddmmProblem::new(&a, &b, &pat).unwrap();
        let got = sddmm(&p, TileConfig::new(8, 4, 1, 1).unwrap()).unwrap();
        for (pos, (r, c, _)) in pat.triplets().enumerate() {
            let mut s = 0f32;
            for k in 0..33 {
                s += a.get(r, k) * b.get(c, k);
            }
            assert_eq!(got.values()[pos].to_bits(), s.to_bits());
        }
    }

    #[test]
    fn all_configs_near_reference_and_share_structure() {
        for (m, n, k) in [(1, 1, 1), (9, 65, 4), (33, 17, 33), (64, 31, 64), (5, 40, 32)] {
            let pat = random_csr(m, n, 0.5, (m * n) as u64, RowProfile::Uniform).unwrap();
            let a = dense(m, k, 3);
            let b = dense(n, k, 4);
            let p = SddmmProblem::new(&a, &b, &pat).unwrap();
            let want = sddmm_reference(&p).unwrap();
            for cfg in configs() {
                let got = sddmm(&p, cfg).unwrap();
                assert_eq!(got.row_offsets(), pat.row_offsets());
                assert_eq!(got.col_indices(), pat.col_indices());
                for (x, y) in got.values().iter().zip(want.values()) {
                    assert!((x - y).abs() <= 1e-5 * (1.0 + y.abs()), "{cfg}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn swizzle_and_pattern_values_do_not_matter() {
        let pat = random_csr(40, 30, 0.7, 9, RowProfile::LogNormal { cov_target: 1.2 }).unwrap();
        let a = dense(40, 12, 5);
        let b = dense(30, 12, 6);
        let cfg = TileConfig::new(16, 8, 2, 4).unwrap();
        let base = sddmm(&SddmmProblem::new(&a, &b, &pat).unwrap(), cfg).unwrap();
        let sw = build_row_swizzle(&pat);
        let opts = SddmmOptions {
            swizzle: Some(&sw),
            scale_values: false,
        };
        let swz = sddmm_with(&Sequential, &SddmmProblem::new(&a, &b, &pat).unwrap(), cfg, &opts).unwrap();
        assert_eq!(swz.values(), base.values());
        let other = pat.map_values(|v| v * 3.0 + 7.0);
        let p2 = SddmmProblem::new(&a, &b, &other).unwrap();
        assert_eq!(sddmm(&p2, cfg).unwrap().values(), base.values());
    }

    #[test]
    fn general_scaling() {
        let pat = random_csr(12, 14, 0.5, 2, RowProfile::Uniform).unwrap();
        let a = dense(12, 8, 7);
        let b = dense(14, 8, 8);
        let cfg = default_tile_config(8, KernelKind::Sddmm);
        let p = SddmmProblem::new(&a, &b, &pat).unwrap();
        let plain = sddmm(&p, cfg).unwrap();
        assert_eq!(sddmm_general(&p, false, cfg).unwrap().values(), plain.values());

        let twos = pat.map_values(|_| 2.0f32);
        let p2 = SddmmProblem::new(&a, &b, &twos).unwrap();
        let doubled = sddmm_general(&p2, true, cfg).unwrap();
        for (d, v) in doubled.values().iter().zip(plain.values()) {
            assert_eq!(*d, 2.0 * v);
        }

        let scaled = sddmm_general(&p, true, cfg).unwrap();
        let oracle = sddmm_reference(&p).unwrap();
        for ((s, o), w) in scaled.values().iter().zip(oracle.values()).zip(pat.values()) {
            let want = o * w;
            assert!((s - want).abs() <= 1e-5 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn transpose_consistency() {
        let pat = random_csr(21, 13, 0.6, 4, RowProfile::Uniform).unwrap();
        let a = dense(21, 10, 9);
        let b = dense(13, 10, 10);
        let cfg = default_tile_config(10, KernelKind::Sddmm);
        let fwd = sddmm(&SddmmProblem::new(&a, &b, &pat).unwrap(), cfg).unwrap();
        let pat_t = transpose(&pat).unwrap();
        let back = sddmm(&SddmmProblem::new(&b, &a, &pat_t).unwrap(), cfg).unwrap();
        let back_t = transpose(&back).unwrap();
        assert!(back_t.same_structure(&fwd));
        for (x, y) in back_t.values().iter().zip(fwd.values()) {
            assert!((x - y).abs() <= 1e-6);
        }
    }

    #[test]
    fn mixed_precision_inputs() {
        use half::f16;
        let pat = random_csr(10, 12, 0.5, 6, RowProfile::Uniform)
            .unwrap()
            .convert_values::<f16>();
        let a = dense(10, 16, 11).convert::<f16>();
        let b = dense(12, 16, 12).convert::<f16>();
        let p = SddmmProblem::new(&a, &b, &pat).unwrap();
        let got = sddmm(&p, default_tile_config(16, KernelKind::Sddmm)).unwrap();
        let want = sddmm_reference(&p).unwrap();
        for (x, y) in got.values().iter().zip(want.values()) {
            assert!((x.to_f32() - y.to_f32()).abs() <= 1e-2 * (1.0 + y.to_f32().abs()));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        // Dense A·Bᵀ in f64, gathered at the pattern positions.
        #[test]
        fn reference_matches_dense_gather(
            m in 1usize..20, n in 1usize..20, k in 1usize..40,
            s in 0.0f64..0.95, seed in any::<u64>()
        ) {
            let pat = random_csr(m, n, s, seed, RowProfile::Uniform).unwrap();
            let a = dense(m, k, seed as usize % 7);
            let b = dense(n, k, seed as usize % 11);
            let p = SddmmProblem::new(&a, &b, &pat).unwrap();
            let got = sddmm_reference(&p).unwrap();
            let cfg = default_tile_config(k, KernelKind::Sddmm);
            let fast = sddmm(&p, cfg).unwrap();
            for (pos, (i, j, _)) in pat.triplets().enumerate() {
                let mut d = 0f64;
                for q in 0..k {
                    d += a.get(i, q) as f64 * b.get(j, q) as f64;
                }
                prop_assert!((got.values()[pos] as f64 - d).abs() <= 1e-6 * (1.0 + d.abs()));
                prop_assert!((fast.values()[pos] as f64 - d).abs() <= 1e-5 * (1.0 + d.abs()));
            }
        }
    }
}
