use std::hint::black_box;
use std::path::PathBuf;

use clap::Args;
use sparsekit_core::attention::{
    generate_mask, sparse_attention_with, sparse_softmax_with, AttentionConfig, AttentionMaskSpec,
};
use sparsekit_core::matrix::random_dense;
use sparsekit_core::sddmm::{sddmm_with, SddmmOptions, SddmmProblem};
use sparsekit_core::spmm::{spmm_with, SpmmOptions};
use sparsekit_core::{CsrMatrix, DenseMatrix};

use super::{csv_writer, fmt_f64, CliError};
use crate::timing::{measure, Timing, REPEATS, WARMUPS};
use crate::PoolExecutor;

/// `sparse_bytes` is the CSR score storage over all heads; `dense_bytes`
/// is what dense `seq_len × seq_len` `f32` scores would take.
pub const ATTENTION_HEADER: [&str; 11] = [
    "stage",
    "seq_len",
    "band",
    "sparsity",
    "nnz",
    "heads",
    "runtime_ns",
    "spread",
    "tokens_per_s",
    "sparse_bytes",
    "dense_bytes",
];

#[derive(Args, Debug, Clone)]
pub struct AttentionArgs {
    #[arg(long, default_value_t = 4096)]
    pub seq_len: usize,
    /// Width of the always-attended local band.
    #[arg(long, default_value_t = 256)]
    pub band: usize,
    /// Fraction of off-band positions dropped.
    #[arg(long, default_value_t = 0.95)]
    pub sparsity: f64,
    #[arg(long, default_value_t = 64)]
    pub dk: usize,
    #[arg(long, default_value_t = 64)]
    pub dv: usize,
    #[arg(long, default_value_t = 1)]
    pub heads: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

struct Head {
    q: DenseMatrix<f32>,
    k: DenseMatrix<f32>,
    v: DenseMatrix<f32>,
}

/// CSR footprint: `f32` values, `u32` indices and `usize` offsets.
fn csr_bytes(m: &CsrMatrix<f32>) -> usize {
    m.nnz() * (size_of::<f32>() + size_of::<u32>()) + (m.rows() + 1) * size_of::<usize>()
}

pub(crate) fn run_attention(args: &AttentionArgs) -> Result<(), CliError> {
    if args.heads == 0 || args.dk == 0 || args.dv == 0 {
        return Err(CliError::Usage("--heads, --dk and --dv must be at least 1".into()));
    }
    if args.threads == Some(0) {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    let exec = PoolExecutor::new(args.threads).map_err(|e| CliError::Usage(e.to_string()))?;
    let spec = AttentionMaskSpec::new(args.seq_len, args.band, args.sparsity, args.seed);
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let mask = generate_mask(&spec)?;
    let l = args.seq_len;
    let heads: Vec<Head> = (0..args.heads as u64)
        .map(|h| {
            let base = args.seed.wrapping_add(3 * h + 1);
            Head {
                q: random_dense(l, args.dk, base),
                k: random_dense(l, args.dk, base + 1),
                v: random_dense(l, args.dv, base + 2),
            }
        })
        .collect();
    let cfg = AttentionConfig::for_dims(args.dk, args.dv);
    let scale = 1.0 / (args.dk as f32).sqrt();

    // stage inputs, computed once so each stage is timed alone
    let scores: Vec<CsrMatrix<f32>> = heads
        .iter()
        .map(|h| {
            let p = SddmmProblem::new(&h.q, &h.k, &mask)?;
            sddmm_with(&exec, &p, cfg.scores, &SddmmOptions::default())
        })
        .collect::<Result<_, _>>()?;
    let probs: Vec<CsrMatrix<f32>> = scores.iter().map(|s| sparse_softmax_with(&exec, s, scale)).collect();

    let stage_sddmm = measure(WARMUPS, REPEATS, || {
        for h in &heads {
            let p = SddmmProblem::new(&h.q, &h.k, &mask).expect("shapes checked");
            black_box(sddmm_with(&exec, &p, cfg.scores, &SddmmOptions::default()).expect("config checked"));
        }
    });
    let stage_softmax = measure(WARMUPS, REPEATS, || {
        for s in &scores {
            black_box(sparse_softmax_with(&exec, s, scale));
        }
    });
    let stage_spmm = measure(WARMUPS, REPEATS, || {
        for (p, h) in probs.iter().zip(&heads) {
            black_box(spmm_with(&exec, p, &h.v, cfg.output, &SpmmOptions::default()).expect("config checked"));
        }
    });
    let total = measure(WARMUPS, REPEATS, || {
        for h in &heads {
            black_box(sparse_attention_with(&exec, &h.q, &h.k, &h.v, &mask, &cfg).expect("config checked"));
        }
    });

    let sparse_bytes = csr_bytes(&mask) * args.heads;
    let dense_bytes = l * l * size_of::<f32>() * args.heads;
    let tokens = (l * args.heads) as f64;
    let mut w = csv_writer(args.output.as_deref())?;
    w.write_record(ATTENTION_HEADER)?;
    let stages: [(&str, &Timing); 4] = [
        ("sddmm", &stage_sddmm),
        ("softmax", &stage_softmax),
        ("spmm", &stage_spmm),
        ("total", &total),
    ];
    for (name, t) in stages {
        let per_s = if t.median_ns > 0.0 {
            tokens * 1e9 / t.median_ns
        } else {
            f64::INFINITY
        };
        w.write_record([
            name.to_string(),
            l.to_string(),
            args.band.to_string(),
            fmt_f64(args.sparsity),
            mask.nnz().to_string(),
            args.heads.to_string(),
            format!("{:.0}", t.median_ns),
            fmt_f64(t.spread()),
            fmt_f64(per_s),
            sparse_bytes.to_string(),
            dense_bytes.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
