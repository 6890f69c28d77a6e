use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparsekit_core::attention::{
    attention_reference, generate_mask, sparse_attention_with, sparse_softmax_with, AttentionConfig, AttentionMaskSpec,
};
use sparsekit_core::matrix::{random_csr, random_dense, RowProfile};
use sparsekit_core::sddmm::{sddmm_with, SddmmOptions, SddmmProblem};
use sparsekit_core::spmm::{default_tile_config, spmm_with, KernelKind, SpmmOptions, TileConfig};
use sparsekit_core::verify::{normwise_relative_error, sddmm_relative_error, spmm_relative_error};
use sparsekit_core::{f16, CsrMatrix, DenseMatrix, Executor};

use super::{csv_writer, CliError};

pub const CHECK_HEADER: [&str; 6] = ["suite", "cell", "cases", "max_error", "tolerance", "passed"];

const DIMS: [usize; 9] = [1, 2, 3, 16, 31, 32, 33, 64, 65];
const QUICK_DIMS: [usize; 5] = [1, 3, 31, 33, 64];
const SPARSITIES: [f64; 4] = [0.5, 0.7, 0.9, 0.98];
const SDDMM_DEPTHS: [usize; 5] = [1, 4, 32, 33, 64];
const VECTOR_WIDTHS: [usize; 3] = [1, 2, 4];
const BLOCK_ROWS: [usize; 2] = [1, 4];

const F32_TOLERANCE: f64 = 1e-5;
const F16_TOLERANCE: f64 = 1e-2;
const SOFTMAX_TOLERANCE: f64 = 1e-6;
const ATTENTION_TOLERANCE: f64 = 1e-4;

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    /// Reduced grid.
    #[arg(long)]
    pub quick: bool,
    /// Corrupt one kernel output to exercise the failure path.
    #[arg(long)]
    pub inject_fault: bool,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Aggregated outcome of one grid cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckCell {
    pub suite: &'static str,
    pub cell: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Which grid to run.
#[derive(Clone, Copy, Debug, Default)]
pub struct GridOptions {
    pub quick: bool,
    pub inject_fault: bool,
    pub seed: u64,
}

#[derive(Default)]
struct Tally {
    cells: BTreeMap<(&'static str, String), CheckCell>,
    order: Vec<(&'static str, String)>,
}

impl Tally {
    /// Records one case; `exact` failures (bit mismatch, structure change)
    /// fail the cell regardless of the error value.
    fn record(&mut self, suite: &'static str, cell: String, tolerance: f64, error: f64, exact: bool) {
        let key = (suite, cell);
        let entry = self.cells.entry(key.clone()).or_insert_with(|| {
            self.order.push(key.clone());
            CheckCell {
                suite,
                cell: key.1.clone(),
                cases: 0,
                max_error: 0.0,
                tolerance,
                passed: true,
            }
        });
        entry.cases += 1;
        // NaN compares false, so fold it in explicitly
        if error.is_nan() || error > entry.max_error {
            entry.max_error = error;
        }
        entry.passed &= exact && error <= tolerance;
    }

    fn into_cells(mut self) -> Vec<CheckCell> {
        self.order
            .iter()
            .map(|k| self.cells.remove(k).expect("recorded"))
            .collect()
    }
}

fn tile(dim: usize, kind: KernelKind, vw: usize, y: usize) -> sparsekit_core::Result<TileConfig> {
    let cfg = TileConfig {
        block_items_y: y,
        ..default_tile_config(dim, kind).with_vector_width(vw)?
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Row-sequential `f32` product with one multiply and one add per nonzero
/// in storage order; the tiled kernel must reproduce it bit for bit.
fn sequential_f32_spmm(a: &CsrMatrix<f32>, b: &DenseMatrix<f32>) -> DenseMatrix<f32> {
    let mut c = DenseMatrix::zeros(a.rows(), b.cols());
    for r in 0..a.rows() {
        let (cols, vals) = a.row(r);
        let out = c.row_mut(r);
        for (&k, &v) in cols.iter().zip(vals) {
            for (o, &x) in out.iter_mut().zip(b.row(k as usize)) {
                *o += v * x;
            }
        }
    }
    c
}

fn spmm_suite(exec: &dyn Executor, opts: GridOptions, tally: &mut Tally) {
    let dims: &[usize] = if opts.quick { &QUICK_DIMS } else { &DIMS };
    let sparsities: &[f64] = if opts.quick { &SPARSITIES[..2] } else { &SPARSITIES };
    let mut fault = opts.inject_fault;
    let mut case_seed = opts.seed;
    for &m in dims {
        for &k in dims {
            for &n in dims {
                for &s in sparsities {
                    case_seed = case_seed.wrapping_add(1);
                    let a = random_csr(m, k, s, case_seed, RowProfile::Uniform).expect("valid grid shape");
                    let b = random_dense(k, n, case_seed ^ 0x5eed);
                    let exact = sequential_f32_spmm(&a, &b);
                    for vw in VECTOR_WIDTHS {
                        for y in BLOCK_ROWS {
                            let cell = format!("vw{vw}/y{y}");
                            let Ok(cfg) = tile(n, KernelKind::Spmm, vw, y) else {
                                tally.record("spmm", cell, F32_TOLERANCE, f64::INFINITY, false);
                                continue;
                            };
                            let (err, bit_exact) = match spmm_with(exec, &a, &b, cfg, &SpmmOptions::default()) {
                                Ok(mut c) => {
                                    if std::mem::take(&mut fault) {
                                        c.data_mut()[0] += 1.0;
                                    }
                                    let err = spmm_relative_error(&a, &b, &c).unwrap_or(f64::INFINITY);
                                    (err, c.bit_eq(&exact))
                                }
                                Err(_) => (f64::INFINITY, false),
                            };
                            tally.record("spmm", cell, F32_TOLERANCE, err, bit_exact);
                        }
                    }
                }
            }
        }
    }
}

fn sddmm_suite(exec: &dyn Executor, opts: GridOptions, tally: &mut Tally) {
    let dims: &[usize] = if opts.quick { &QUICK_DIMS } else { &DIMS };
    let depths: &[usize] = if opts.quick { &SDDMM_DEPTHS[1..4] } else { &SDDMM_DEPTHS };
    let sparsities: &[f64] = if opts.quick { &SPARSITIES[..2] } else { &SPARSITIES };
    let mut case_seed = opts.seed.wrapping_add(1 << 32);
    for &m in dims {
        for &n in dims {
            for &k in depths {
                for &s in sparsities {
                    case_seed = case_seed.wrapping_add(1);
                    let pattern = random_csr(m, n, s, case_seed, RowProfile::Uniform).expect("valid grid shape");
                    let a = random_dense(m, k, case_seed ^ 0xa);
                    let b = random_dense(n, k, case_seed ^ 0xb);
                    let p = SddmmProblem::new(&a, &b, &pattern).expect("matching shapes");
                    for vw in VECTOR_WIDTHS {
                        for y in BLOCK_ROWS {
                            let cell = format!("k{k}/vw{vw}/y{y}");
                            let out = tile(k, KernelKind::Sddmm, vw, y)
                                .and_then(|cfg| sddmm_with(exec, &p, cfg, &SddmmOptions::default()));
                            let (err, same) = match out {
                                Ok(o) => (
                                    sddmm_relative_error(&p, &o).unwrap_or(f64::INFINITY),
                                    o.row_offsets() == pattern.row_offsets()
                                        && o.col_indices() == pattern.col_indices(),
                                ),
                                Err(_) => (f64::INFINITY, false),
                            };
                            tally.record("sddmm", cell, F32_TOLERANCE, err, same);
                        }
                    }
                }
            }
        }
    }
}

fn mixed_suite(exec: &dyn Executor, opts: GridOptions, tally: &mut Tally) {
    let problems = if opts.quick { 10 } else { 50 };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0xf16);
    for i in 0..problems {
        let m = rng.random_range(1..=64);
        let k = rng.random_range(1..=4096);
        let n = rng.random_range(1..=65);
        let s = SPARSITIES[i % SPARSITIES.len()];
        let seed = rng.random();
        let a = random_csr(m, k, s, seed, RowProfile::Uniform)
            .expect("valid shape")
            .convert_values::<f16>()
            .to_index_width::<u16>()
            .expect("k fits 16-bit indices");
        let b = random_dense(k, n, seed ^ 1).convert::<f16>();
        let err = spmm_with(
            exec,
            &a,
            &b,
            default_tile_config(n, KernelKind::Spmm),
            &SpmmOptions::default(),
        )
        .map_or(f64::INFINITY, |c| {
            spmm_relative_error(&a, &b, &c).unwrap_or(f64::INFINITY)
        });
        tally.record("mixed", "spmm-f16".into(), F16_TOLERANCE, err, true);

        let pattern = random_csr(m, n, s, seed ^ 2, RowProfile::Uniform)
            .expect("valid shape")
            .convert_values::<f16>()
            .to_index_width::<u16>()
            .expect("n fits 16-bit indices");
        let depth = k.min(256);
        let qa = random_dense(m, depth, seed ^ 3).convert::<f16>();
        let qb = random_dense(n, depth, seed ^ 4).convert::<f16>();
        let p = SddmmProblem::new(&qa, &qb, &pattern).expect("matching shapes");
        let err = sddmm_with(
            exec,
            &p,
            default_tile_config(depth, KernelKind::Sddmm),
            &SddmmOptions::default(),
        )
        .map_or(f64::INFINITY, |o| sddmm_relative_error(&p, &o).unwrap_or(f64::INFINITY));
        tally.record("mixed", "sddmm-f16".into(), F16_TOLERANCE, err, true);
    }
    let wide = CsrMatrix::<f32>::empty(1, 65_537);
    let rejected = wide.to_index_width::<u16>().is_err();
    tally.record("mixed", "u16-index-limit".into(), 0.0, 0.0, rejected);
}

fn softmax_suite(exec: &dyn Executor, opts: GridOptions, tally: &mut Tally) {
    let rows = if opts.quick { 100 } else { 1000 };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x50f7);
    let mut offsets = vec![0usize];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for _ in 0..rows {
        let len = rng.random_range(1..=64usize);
        indices.extend(0..len as u32);
        values.extend((0..len).map(|_| rng.random_range(-8.0f32..8.0)));
        offsets.push(indices.len());
    }
    let m = CsrMatrix::from_parts(rows, 64, offsets, indices, values).expect("well-formed rows");
    // shift by an exactly representable constant per row
    let shifted = m.map_values(|v| v + 3.0);
    let p = sparse_softmax_with(exec, &m, 1.0);
    let q = sparse_softmax_with(exec, &shifted, 1.0);
    for r in 0..rows {
        let (_, pv) = p.row(r);
        let (_, qv) = q.row(r);
        let sum: f64 = pv.iter().map(|&v| v as f64).sum();
        tally.record("softmax", "row-sum".into(), SOFTMAX_TOLERANCE, (sum - 1.0).abs(), true);
        let shift = pv
            .iter()
            .zip(qv)
            .map(|(&x, &y)| (x as f64 - y as f64).abs())
            .fold(0.0, f64::max);
        tally.record("softmax", "shift-invariance".into(), SOFTMAX_TOLERANCE, shift, true);
    }
}

fn attention_suite(exec: &dyn Executor, opts: GridOptions, tally: &mut Tally) {
    let lengths: Vec<usize> = if opts.quick {
        vec![1, 2, 7, 33, 64]
    } else {
        (1..=64).collect()
    };
    let (dk, dv) = (16, 24);
    let cfg = AttentionConfig::for_dims(dk, dv);
    for l in lengths {
        let seed = opts.seed.wrapping_add(l as u64);
        let band = 1 + (seed as usize % 8);
        let mask = generate_mask(&AttentionMaskSpec::new(l, band, 0.7, seed)).expect("valid mask spec");
        let q = random_dense(l, dk, seed ^ 1);
        let k = random_dense(l, dk, seed ^ 2);
        let v = random_dense(l, dv, seed ^ 3);
        let err = match (
            sparse_attention_with(exec, &q, &k, &v, &mask, &cfg),
            attention_reference(&q, &k, &v, &mask),
        ) {
            (Ok(got), Ok(want)) => normwise_relative_error(got.data(), &want),
            _ => f64::INFINITY,
        };
        tally.record("attention", "pipeline".into(), ATTENTION_TOLERANCE, err, true);
    }
    let small = generate_mask(&AttentionMaskSpec::new(4, 2, 1.0, opts.seed)).map_or(0, |m| m.nnz());
    tally.record("attention", "band-nnz".into(), 0.0, 0.0, small == 7);
}

/// Runs every suite and returns one entry per cell in report order.
pub fn check_grid(exec: &dyn Executor, opts: GridOptions) -> Vec<CheckCell> {
    let mut tally = Tally::default();
    spmm_suite(exec, opts, &mut tally);
    sddmm_suite(exec, opts, &mut tally);
    mixed_suite(exec, opts, &mut tally);
    softmax_suite(exec, opts, &mut tally);
    attention_suite(exec, opts, &mut tally);
    tally.into_cells()
}

pub(crate) fn run_check(args: &CheckArgs) -> Result<(), CliError> {
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let exec = crate::PoolExecutor::new(args.threads).map_err(|e| CliError::Usage(e.to_string()))?;
    let cells = check_grid(
        &exec,
        GridOptions {
            quick: args.quick,
            inject_fault: args.inject_fault,
            seed: args.seed,
        },
    );
    let mut w = csv_writer(args.output.as_deref())?;
    w.write_record(CHECK_HEADER)?;
    for c in &cells {
        w.write_record([
            c.suite.to_string(),
            c.cell.clone(),
            c.cases.to_string(),
            format!("{:.3e}", c.max_error),
            format!("{:.0e}", c.tolerance),
            c.passed.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    let failed: Vec<String> = cells
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{}/{}", c.suite, c.cell))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{} cell(s) failed: {}",
            failed.len(),
            failed.join(", ")
        )))
    }
}
