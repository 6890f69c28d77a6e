//! Benchmark problems behind one interface, so `bench` and `ablate` can
//! treat kernels and precisions uniformly.

use sparsekit_core::balance::{build_row_swizzle, RowSwizzle};
use sparsekit_core::matrix::random_dense;
use sparsekit_core::sddmm::{sddmm_with, SddmmOptions, SddmmProblem};
use sparsekit_core::spmm::{spmm_with, Epilogue, KernelToggles, SpmmOptions, TileConfig};
use sparsekit_core::verify::{sddmm_relative_error, spmm_relative_error};
use sparsekit_core::{f16, CsrMatrix, DenseMatrix, Element, Executor, Precision, SparseIndex};

use super::args::KernelArg;
use super::CliError;

/// Optimizations that can be switched off one at a time.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Variant {
    pub swizzle: bool,
    pub prescale: bool,
    pub residue_unroll: bool,
}

impl Variant {
    pub const FULL: Self = Self {
        swizzle: true,
        prescale: true,
        residue_unroll: true,
    };
}

pub(crate) trait Case: Sync {
    fn kernel(&self) -> KernelArg;
    /// `(M, K, N)`; for SDDMM `K` is the shared inner dimension.
    fn dims(&self) -> (usize, usize, usize);
    fn nnz(&self) -> usize;
    fn precision(&self) -> Precision;
    /// Useful floating-point operations of one run.
    fn flops(&self) -> f64 {
        let (_, k, n) = self.dims();
        let width = match self.kernel() {
            KernelArg::Spmm => n,
            KernelArg::Sddmm => k,
        };
        2.0 * self.nnz() as f64 * width as f64
    }
    fn tolerance(&self) -> f64 {
        match self.precision() {
            Precision::F32 => 1e-5,
            Precision::F16 => 1e-2,
        }
    }
    fn run(&self, exec: &dyn Executor, cfg: TileConfig, v: Variant) -> Result<(), CliError>;
    /// Runs once and returns the largest error against the `f64` oracle.
    fn verify(&self, exec: &dyn Executor, cfg: TileConfig, v: Variant) -> Result<f64, CliError>;
}

struct SpmmCase<T: Element, I: SparseIndex> {
    a: CsrMatrix<T, I>,
    b: DenseMatrix<T>,
    swizzle: RowSwizzle,
}

impl<T: Element, I: SparseIndex> SpmmCase<T, I> {
    fn product(&self, exec: &dyn Executor, cfg: TileConfig, v: Variant) -> Result<DenseMatrix<T>, CliError> {
        let opts = SpmmOptions {
            swizzle: v.swizzle.then_some(&self.swizzle),
            epilogue: Epilogue::None,
            toggles: KernelToggles {
                roma: true,
                prescale: v.prescale,
                residue_unroll: v.residue_unroll,
            },
        };
        Ok(spmm_with(exec, &self.a, &self.b, cfg, &opts)?)
    }
}

impl<T: Element, I: SparseIndex> Case for SpmmCase<T, I> {
    fn kernel(&self) -> KernelArg {
        KernelArg::Spmm
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.a.rows(), self.a.cols(), self.b.cols())
    }

    fn nnz(&self) -> usize {
        self.a.nnz()
    }

    fn precision(&self) -> Precision {
        T::PRECISION
    }

    fn run(&self, exec: &dyn Executor, cfg: TileConfig, v: Variant) -> Result<(), CliError> {
        std::hint::black_box(self.product(exec, cfg, v)?);
        Ok(())
    }

    fn verify(&self, exec: &dyn Executor, cfg: TileConfig, v: Variant) -> Result<f64, CliError> {
        let c = self.product(exec, cfg, v)?;
        Ok(spmm_relative_error(&self.a, &self.b, &c)?)
    }
}

struct SddmmCase<T: Element, I: SparseIndex> {
    pattern: CsrMatrix<T, I>,
    a: DenseMatrix<T>,
    b: DenseMatrix<T>,
    swizzle: RowSwizzle,
}

impl<T: Element, I: SparseIndex> SddmmCase<T, I> {
    fn values(&self, exec: &dyn Executor, cfg: TileConfig, v: Variant) -> Result<CsrMatrix<T, I>, CliError> {
        let p = SddmmProblem::new(&self.a, &self.b, &self.pattern)?;
        let opts = SddmmOptions {
            swizzle: v.swizzle.then_some(&self.swizzle),
            scale_values: false,
        };
        Ok(sddmm_with(exec, &p, cfg, &opts)?)
    }
}

impl<T: Element, I: SparseIndex> Case for SddmmCase<T, I> {
    fn kernel(&self) -> KernelArg {
        KernelArg::Sddmm
    }

    fn dims(&self) -> (usize, usize, usize) {
        (self.pattern.rows(), self.a.cols(), self.pattern.cols())
    }

    fn nnz(&self) -> usize {
        self.pattern.nnz()
    }

    fn precision(&self) -> Precision {
        T::PRECISION
    }

    fn run(&self, exec: &dyn Executor, cfg: TileConfig, v: Variant) -> Result<(), CliError> {
        std::hint::black_box(self.values(exec, cfg, v)?);
        Ok(())
    }

    fn verify(&self, exec: &dyn Executor, cfg: TileConfig, v: Variant) -> Result<f64, CliError> {
        let out = self.values(exec, cfg, v)?;
        let p = SddmmProblem::new(&self.a, &self.b, &self.pattern)?;
        Ok(sddmm_relative_error(&p, &out)?)
    }
}

/// Builds the dense operands from `seed` and converts to the requested
/// precision. The 16-bit path also narrows indices to 16 bits.
pub(crate) fn build_case(
    kernel: KernelArg,
    precision: Precision,
    matrix: CsrMatrix<f32>,
    n: usize,
    seed: u64,
) -> Result<Box<dyn Case>, CliError> {
    let swizzle = build_row_swizzle(&matrix);
    let (rows, cols) = (matrix.rows(), matrix.cols());
    match (kernel, precision) {
        (KernelArg::Spmm, Precision::F32) => Ok(Box::new(SpmmCase {
            b: random_dense(cols, n, seed.wrapping_add(1)),
            a: matrix,
            swizzle,
        })),
        (KernelArg::Spmm, Precision::F16) => Ok(Box::new(SpmmCase {
            a: matrix.convert_values::<f16>().to_index_width::<u16>()?,
            b: random_dense(cols, n, seed.wrapping_add(1)).convert::<f16>(),
            swizzle,
        })),
        (KernelArg::Sddmm, Precision::F32) => Ok(Box::new(SddmmCase {
            a: random_dense(rows, n, seed.wrapping_add(1)),
            b: random_dense(cols, n, seed.wrapping_add(2)),
            pattern: matrix,
            swizzle,
        })),
        (KernelArg::Sddmm, Precision::F16) => Ok(Box::new(SddmmCase {
            pattern: matrix.convert_values::<f16>().to_index_width::<u16>()?,
            a: random_dense(rows, n, seed.wrapping_add(1)).convert::<f16>(),
            b: random_dense(cols, n, seed.wrapping_add(2)).convert::<f16>(),
            swizzle,
        })),
    }
}
