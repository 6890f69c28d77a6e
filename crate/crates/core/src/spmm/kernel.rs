use alloc::vec;

use half::f16;

use super::config::{TileConfig, MAX_BLOCK_ITEMS_K, MAX_BLOCK_ITEMS_X};
use super::prescale::prescale_fits;
use super::roma::roma_align;
use crate::balance::RowSwizzle;
use crate::element::{Element, SparseIndex};
use crate::error::{Result, SparseError};
use crate::exec::{DisjointWriter, Executor, Sequential};
use crate::matrix::{CsrMatrix, DenseMatrix, ValidationReport, Violation};

/// Per-output-row post-processing fused into the store.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum Epilogue<'a> {
    #[default]
    None,
    /// `c[i][j] + bias[i]`
    Bias(&'a [f32]),
    /// `max(0, c[i][j] + bias[i])`
    BiasRelu(&'a [f32]),
}

impl Epilogue<'_> {
    fn bias(&self) -> Option<&[f32]> {
        match self {
            Epilogue::None => None,
            Epilogue::Bias(b) | Epilogue::BiasRelu(b) => Some(b),
        }
    }
}

/// Kernel optimizations that can be switched off for ablation. Every
/// combination produces bit-identical output.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KernelToggles {
    /// Reverse-offset memory alignment of row starts.
    pub roma: bool,
    /// Store column indices pre-multiplied by the dense row stride.
    pub prescale: bool,
    /// Zero-pad the residue and run it through the 4× unrolled loop instead
    /// of a bounds-checked scalar loop.
    pub residue_unroll: bool,
}

impl Default for KernelToggles {
    fn default() -> Self {
        Self {
            roma: true,
            prescale: true,
            residue_unroll: true,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SpmmOptions<'a> {
    /// Row processing order. Falls back to the swizzle attached to the
    /// sparse operand, then to natural order.
    pub swizzle: Option<&'a RowSwizzle>,
    pub epilogue: Epilogue<'a>,
    pub toggles: KernelToggles,
}

/// `C = A·B` on the calling thread with every optimization enabled.
pub fn spmm<T: Element, I: SparseIndex>(
    a: &CsrMatrix<T, I>,
    b: &DenseMatrix<T>,
    cfg: TileConfig,
    swizzle: Option<&RowSwizzle>,
    epilogue: Epilogue<'_>,
) -> Result<DenseMatrix<T>> {
    spmm_with(
        &Sequential,
        a,
        b,
        cfg,
        &SpmmOptions {
            swizzle,
            epilogue,
            toggles: KernelToggles::default(),
        },
    )
}

/// Mixed-precision SpMM: 16-bit values and indices in, `f32` accumulation,
/// 16-bit output rounded to nearest even. Indices are never pre-scaled.
pub fn spmm_mixed<E: Executor + ?Sized>(
    exec: &E,
    a: &CsrMatrix<f16, u16>,
    b: &DenseMatrix<f16>,
    cfg: TileConfig,
    swizzle: Option<&RowSwizzle>,
) -> Result<DenseMatrix<f16>> {
    spmm_with(
        exec,
        a,
        b,
        cfg,
        &SpmmOptions {
            swizzle,
            ..Default::default()
        },
    )
}

/// Tiled `C = A·B`.
///
/// Work is split into `ceil(M / block_items_y) * ceil(N / block_items_x)`
/// tasks, numbered column-tile-fastest. Each output element is accumulated
/// in `f32` by exactly one task, adding products in ascending nonzero order,
/// so the result does not depend on the executor, the swizzle, the vector
/// width or the toggles.
pub fn spmm_with<T, I, E>(
    exec: &E,
    a: &CsrMatrix<T, I>,
    b: &DenseMatrix<T>,
    cfg: TileConfig,
    opts: &SpmmOptions<'_>,
) -> Result<DenseMatrix<T>>
where
    T: Element,
    I: SparseIndex,
    E: Executor + ?Sized,
{
    cfg.validate()?;
    if a.cols() != b.rows() {
        return Err(SparseError::ShapeMismatch {
            op: "spmm",
            left_rows: a.rows(),
            left_cols: a.cols(),
            right_rows: b.rows(),
            right_cols: b.cols(),
        });
    }
    if b.cols() == 0 {
        return Err(SparseError::InvalidArgument("dense operand has no columns"));
    }
    let swizzle = opts.swizzle.or(a.swizzle());
    if let Some(sw) = swizzle {
        check_swizzle(sw, a.rows())?;
    }
    if let Some(bias) = opts.epilogue.bias() {
        if bias.len() != a.rows() {
            return Err(SparseError::BiasLength {
                expected: a.rows(),
                found: bias.len(),
            });
        }
    }

    let (m, n) = (a.rows(), b.cols());
    let mut c = vec![T::ZERO; m * n];
    {
        let kernel = SpmmKernel {
            a,
            b: b.data(),
            n,
            cfg,
            order: swizzle.map(|s| s.order()),
            epilogue: opts.epilogue,
            roma: opts.toggles.roma,
            prescale: opts.toggles.prescale && I::PRESCALE && prescale_fits::<I>(a.cols(), n),
            residue_unroll: opts.toggles.residue_unroll,
            col_tiles: n.div_ceil(cfg.block_items_x),
            out: DisjointWriter::new(&mut c),
        };
        let tasks = m.div_ceil(cfg.block_items_y) * kernel.col_tiles;
        exec.for_each_task(tasks, &|t| kernel.run_task(t));
    }
    DenseMatrix::from_vec(m, n, c)
}

pub(crate) fn check_swizzle(sw: &RowSwizzle, rows: usize) -> Result<()> {
    let violation = if sw.len() != rows {
        Violation::SwizzleLength {
            expected: rows,
            found: sw.len(),
        }
    } else if let Err(slot) = sw.check_permutation() {
        Violation::SwizzleNotPermutation { slot }
    } else {
        return Ok(());
    };
    Err(SparseError::Invalid(ValidationReport {
        violations: vec![violation],
    }))
}

struct SpmmKernel<'a, T, I> {
    a: &'a CsrMatrix<T, I>,
    b: &'a [T],
    n: usize,
    cfg: TileConfig,
    order: Option<&'a [usize]>,
    epilogue: Epilogue<'a>,
    roma: bool,
    prescale: bool,
    residue_unroll: bool,
    col_tiles: usize,
    out: DisjointWriter<'a, T>,
}

/// Per-task staging buffers: the sparse values and dense-row offsets of one
/// K-step, and the accumulators of one output row tile.
struct Scratch {
    values: [f32; MAX_BLOCK_ITEMS_K],
    offsets: [usize; MAX_BLOCK_ITEMS_K],
    acc: [f32; MAX_BLOCK_ITEMS_X],
}

impl<T: Element, I: SparseIndex> SpmmKernel<'_, T, I> {
    fn run_task(&self, task: usize) {
        match (self.cfg.vector_width, self.prescale) {
            (4, true) => self.run::<4, true>(task),
            (4, false) => self.run::<4, false>(task),
            (2, true) => self.run::<2, true>(task),
            (2, false) => self.run::<2, false>(task),
            (_, true) => self.run::<1, true>(task),
            (_, false) => self.run::<1, false>(task),
        }
    }

    fn run<const VW: usize, const PRE: bool>(&self, task: usize) {
        let group = task / self.col_tiles;
        let n0 = (task % self.col_tiles) * self.cfg.block_items_x;
        let ncols = self.cfg.block_items_x.min(self.n - n0);
        let mut scratch = Scratch {
            values: [0.0; MAX_BLOCK_ITEMS_K],
            offsets: [0; MAX_BLOCK_ITEMS_K],
            acc: [0.0; MAX_BLOCK_ITEMS_X],
        };
        let first_slot = group * self.cfg.block_items_y;
        let last_slot = (first_slot + self.cfg.block_items_y).min(self.a.rows());
        for slot in first_slot..last_slot {
            let row = self.order.map_or(slot, |o| o[slot]);
            self.row_tile::<VW, PRE>(row, n0, ncols, &mut scratch);
        }
    }

    #[inline(always)]
    fn stage_index<const PRE: bool>(&self, col: I) -> usize {
        if PRE {
            col.to_usize() * self.n
        } else {
            col.to_usize()
        }
    }

    fn row_tile<const VW: usize, const PRE: bool>(&self, row: usize, n0: usize, ncols: usize, s: &mut Scratch) {
        let values = self.a.values();
        let cols = self.a.col_indices();
        let offsets = self.a.row_offsets();
        let block_k = self.cfg.block_items_k;

        let mut off = offsets[row];
        let mut nnz = offsets[row + 1] - off;
        let mut mask = 0;
        if self.roma {
            let adj = roma_align(off, nnz, VW);
            off = adj.aligned_offset;
            nnz = adj.adjusted_nnz;
            mask = adj.mask_prefix_len;
        }

        let acc = &mut s.acc[..ncols];
        acc.fill(0.0);
        let mut first = true;
        while nnz > 0 {
            let step = nnz.min(block_k);
            let (vals, offs) = (&mut s.values[..step], &mut s.offsets[..step]);
            if step == block_k && off.is_multiple_of(VW) {
                // Aligned full tile: wide loads.
                let src_v = values[off..off + step].chunks_exact(VW);
                let src_c = cols[off..off + step].chunks_exact(VW);
                for (((dv, dc), sv), sc) in vals
                    .chunks_exact_mut(VW)
                    .zip(offs.chunks_exact_mut(VW))
                    .zip(src_v)
                    .zip(src_c)
                {
                    for l in 0..VW {
                        dv[l] = sv[l].to_f32();
                        dc[l] = self.stage_index::<PRE>(sc[l]);
                    }
                }
            } else {
                for j in 0..step {
                    vals[j] = values[off + j].to_f32();
                    offs[j] = self.stage_index::<PRE>(cols[off + j]);
                }
            }
            if first {
                // Borrowed from the previous row.
                vals[..mask].fill(0.0);
                first = false;
            }

            if step == block_k {
                accumulate_unrolled::<T, VW, PRE>(acc, &s.values[..step], &s.offsets[..step], self.b, self.n, n0);
            } else if self.residue_unroll {
                // Zero entries use column 0 and contribute +0.0.
                let padded = step.next_multiple_of(4);
                s.values[step..padded].fill(0.0);
                s.offsets[step..padded].fill(0);
                accumulate_unrolled::<T, VW, PRE>(acc, &s.values[..padded], &s.offsets[..padded], self.b, self.n, n0);
            } else {
                accumulate_scalar::<T, VW, PRE>(acc, &s.values[..step], &s.offsets[..step], self.b, self.n, n0);
            }
            off += step;
            nnz -= step;
        }

        if let Some(bias) = self.epilogue.bias() {
            let bv = bias[row];
            let relu = matches!(self.epilogue, Epilogue::BiasRelu(_));
            for v in acc.iter_mut() {
                *v += bv;
                if relu {
                    *v = v.max(0.0);
                }
            }
        }

        let mut staged = [T::ZERO; MAX_BLOCK_ITEMS_X];
        for (o, &v) in staged.iter_mut().zip(acc.iter()) {
            *o = T::from_f32(v);
        }
        // SAFETY: (row, n0..n0+ncols) belongs to exactly one task: rows are
        // visited once because the order is a checked permutation, and
        // column tiles are disjoint.
        unsafe { self.out.write(row * self.n + n0, &staged[..ncols]) };
    }
}

#[inline(always)]
fn dense_row<T, const PRE: bool>(b: &[T], staged: usize, n: usize, n0: usize, ncols: usize) -> &[T] {
    let base = if PRE { staged } else { staged * n } + n0;
    &b[base..base + ncols]
}

/// `acc += v · b_row` for each staged nonzero, one at a time.
#[inline(always)]
fn accumulate_scalar<T: Element, const VW: usize, const PRE: bool>(
    acc: &mut [f32],
    vals: &[f32],
    offs: &[usize],
    b: &[T],
    n: usize,
    n0: usize,
) {
    let ncols = acc.len();
    for (&v, &o) in vals.iter().zip(offs) {
        let brow = dense_row::<T, PRE>(b, o, n, n0, ncols);
        let mut ac = acc.chunks_exact_mut(VW);
        let mut bc = brow.chunks_exact(VW);
        for (a, x) in (&mut ac).zip(&mut bc) {
            let a: &mut [f32; VW] = a.try_into().unwrap();
            let x: &[T; VW] = x.try_into().unwrap();
            for l in 0..VW {
                a[l] += v * x[l].to_f32();
            }
        }
        for (a, x) in ac.into_remainder().iter_mut().zip(bc.remainder()) {
            *a += v * x.to_f32();
        }
    }
}

/// Four nonzeros per iteration, no bounds checks on the nonzero count;
/// `vals.len()` must be a multiple of 4. Each accumulator still receives its
/// products in nonzero order.
#[inline(always)]
fn accumulate_unrolled<T: Element, const VW: usize, const PRE: bool>(
    acc: &mut [f32],
    vals: &[f32],
    offs: &[usize],
    b: &[T],
    n: usize,
    n0: usize,
) {
    debug_assert_eq!(vals.len() % 4, 0);
    let ncols = acc.len();
    for (v, o) in vals.chunks_exact(4).zip(offs.chunks_exact(4)) {
        let b0 = dense_row::<T, PRE>(b, o[0], n, n0, ncols);
        let b1 = dense_row::<T, PRE>(b, o[1], n, n0, ncols);
        let b2 = dense_row::<T, PRE>(b, o[2], n, n0, ncols);
        let b3 = dense_row::<T, PRE>(b, o[3], n, n0, ncols);
        let mut ac = acc.chunks_exact_mut(VW);
        let mut c0 = b0.chunks_exact(VW);
        let mut c1 = b1.chunks_exact(VW);
        let mut c2 = b2.chunks_exact(VW);
        let mut c3 = b3.chunks_exact(VW);
        for ((((a, x0), x1), x2), x3) in (&mut ac).zip(&mut c0).zip(&mut c1).zip(&mut c2).zip(&mut c3) {
            let a: &mut [f32; VW] = a.try_into().unwrap();
            let (x0, x1, x2, x3): (&[T; VW], &[T; VW], &[T; VW], &[T; VW]) = (
                x0.try_into().unwrap(),
                x1.try_into().unwrap(),
                x2.try_into().unwrap(),
                x3.try_into().unwrap(),
            );
            let mut t = *a;
            for l in 0..VW {
                t[l] += v[0] * x0[l].to_f32();
            }
            for l in 0..VW {
                t[l] += v[1] * x1[l].to_f32();
            }
            for l in 0..VW {
                t[l] += v[2] * x2[l].to_f32();
            }
            for l in 0..VW {
                t[l] += v[3] * x3[l].to_f32();
            }
            *a = t;
        }
        let tail = ac.into_remainder();
        let (r0, r1, r2, r3) = (c0.remainder(), c1.remainder(), c2.remainder(), c3.remainder());
        for (j, a) in tail.iter_mut().enumerate() {
            let mut t = *a;
            t += v[0] * r0[j].to_f32();
            t += v[1] * r1[j].to_f32();
            t += v[2] * r2[j].to_f32();
            t += v[3] * r3[j].to_f32();
            *a = t;
        }
    }
}
