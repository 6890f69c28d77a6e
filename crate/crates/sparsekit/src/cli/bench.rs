use clap::Args;
use sparsekit_core::spmm::TileConfig;
use sparsekit_core::Executor;

use super::args::{KernelArg, ProblemArgs, RunArgs, TileArgs, ToggleArgs};
use super::workload::{build_case, Case, Variant};
use super::{csv_writer, fmt_f64, CliError};
use crate::timing::{gflops, measure, Timing, REPEATS, WARMUPS};

/// Runtime is the median of 20 timed runs after 3 warmups. Throughput counts
/// useful sparse work only: 2·nnz·N for SpMM and 2·nnz·K for SDDMM.
pub const BENCH_HEADER: [&str; 14] = [
    "kernel",
    "m",
    "k",
    "n",
    "nnz",
    "sparsity",
    "precision",
    "config",
    "disabled",
    "threads",
    "runtime_ns",
    "spread",
    "gflops_sparse_effective",
    "repeats",
];

pub const ABLATE_HEADER: [&str; 9] = [
    "kernel",
    "variant",
    "config",
    "runtime_ns",
    "spread",
    "gflops_sparse_effective",
    "relative_performance_pct",
    "verified",
    "max_error",
];

#[derive(Args, Debug, Clone)]
pub struct BenchArgs {
    #[arg(value_enum)]
    pub kernel: KernelArg,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tile: TileArgs,
    #[command(flatten)]
    pub toggles: ToggleArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Args, Debug, Clone)]
pub struct AblateArgs {
    #[arg(value_enum)]
    pub kernel: KernelArg,
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub tile: TileArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

fn sparsity(case: &dyn Case) -> f64 {
    let (m, k, n) = case.dims();
    let positions = match case.kernel() {
        KernelArg::Spmm => m * k,
        KernelArg::Sddmm => m * n,
    } as f64;
    if positions > 0.0 {
        1.0 - case.nnz() as f64 / positions
    } else {
        0.0
    }
}

fn time_case(case: &dyn Case, exec: &dyn Executor, cfg: TileConfig, v: Variant) -> Result<Timing, CliError> {
    // surface configuration errors before timing
    case.run(exec, cfg, v)?;
    Ok(measure(WARMUPS, REPEATS, || {
        case.run(exec, cfg, v).expect("validated above")
    }))
}

pub(crate) fn run_bench(args: &BenchArgs) -> Result<(), CliError> {
    let matrix = args.problem.load()?;
    let exec = args.run.executor()?;
    let case = build_case(
        args.kernel,
        args.problem.precision.into(),
        matrix,
        args.problem.n,
        args.problem.seed,
    )?;
    let cfg = args
        .tile
        .resolve(args.problem.n, args.kernel.kind(), args.toggles.no_vector)?;
    let variant = Variant {
        swizzle: !args.toggles.no_load_balance,
        prescale: !args.toggles.no_prescale,
        residue_unroll: !args.toggles.no_residue_unroll,
    };
    let t = time_case(case.as_ref(), &exec, cfg, variant)?;

    let (m, k, n) = case.dims();
    let mut w = csv_writer(args.run.output.as_deref())?;
    w.write_record(BENCH_HEADER)?;
    w.write_record([
        args.kernel.name().to_string(),
        m.to_string(),
        k.to_string(),
        n.to_string(),
        case.nnz().to_string(),
        fmt_f64(sparsity(case.as_ref())),
        case.precision().to_string(),
        cfg.to_string(),
        args.toggles.disabled(),
        exec.parallelism().to_string(),
        format!("{:.0}", t.median_ns),
        fmt_f64(t.spread()),
        fmt_f64(gflops(case.flops(), t.median_ns)),
        t.repeats.to_string(),
    ])?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Single-optimization-off variants in report order.
fn ablation_variants(
    kernel: KernelArg,
    base: TileConfig,
) -> Result<Vec<(&'static str, TileConfig, Variant)>, CliError> {
    let full = Variant::FULL;
    let mut v = vec![
        ("full", base, full),
        ("-load-balancing", base, Variant { swizzle: false, ..full }),
        ("-vector-instructions", base.with_vector_width(1)?, full),
    ];
    if kernel == KernelArg::Spmm {
        v.push((
            "-residue-unroll",
            base,
            Variant {
                residue_unroll: false,
                ..full
            },
        ));
        v.push((
            "-index-prescale",
            base,
            Variant {
                prescale: false,
                ..full
            },
        ));
    }
    Ok(v)
}

pub(crate) fn run_ablate(args: &AblateArgs) -> Result<(), CliError> {
    let matrix = args.problem.load()?;
    let exec = args.run.executor()?;
    let case = build_case(
        args.kernel,
        args.problem.precision.into(),
        matrix,
        args.problem.n,
        args.problem.seed,
    )?;
    let base = args.tile.resolve(args.problem.n, args.kernel.kind(), false)?;
    let mut w = csv_writer(args.run.output.as_deref())?;
    w.write_record(ABLATE_HEADER)?;

    let mut baseline_ns = None;
    let mut failures = Vec::new();
    for (name, cfg, variant) in ablation_variants(args.kernel, base)? {
        let err = case.verify(&exec, cfg, variant)?;
        let verified = err <= case.tolerance();
        let (runtime, spread, rate, relative) = if verified {
            let t = time_case(case.as_ref(), &exec, cfg, variant)?;
            let base_ns = *baseline_ns.get_or_insert(t.median_ns);
            (
                format!("{:.0}", t.median_ns),
                fmt_f64(t.spread()),
                fmt_f64(gflops(case.flops(), t.median_ns)),
                fmt_f64(100.0 * base_ns / t.median_ns),
            )
        } else {
            // no timing for outputs that fail the oracle
            failures.push(name);
            Default::default()
        };
        w.write_record([
            args.kernel.name().to_string(),
            name.to_string(),
            cfg.to_string(),
            runtime,
            spread,
            rate,
            relative,
            verified.to_string(),
            format!("{err:.3e}"),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "oracle check failed for: {}",
            failures.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sparsekit_core::spmm::{default_tile_config, KernelKind};

    #[test]
    fn ablation_row_structure() {
        let base = default_tile_config(128, KernelKind::Spmm);
        let spmm = ablation_variants(KernelArg::Spmm, base).unwrap();
        assert_eq!(spmm.len(), 5);
        assert_eq!(spmm[2].1.vector_width, 1);
        let sddmm = ablation_variants(KernelArg::Sddmm, default_tile_config(64, KernelKind::Sddmm)).unwrap();
        assert_eq!(sddmm.len(), 3);
    }
}
