use std::path::PathBuf;

use clap::Args;
use sparsekit_core::balance::{cov_sweep, SchedulerModel, SweepConfig, SweepPoint};
use sparsekit_core::spmm::KernelKind;

use super::args::TileArgs;
use super::{csv_writer, fmt_f64, CliError};

/// Imbalance is makespan over the mean per-SM work, in natural row order
/// and in swizzled order.
pub const SIMULATE_HEADER: [&str; 7] = [
    "cov",
    "unswizzled_imbalance",
    "swizzled_imbalance",
    "wave_count",
    "measured_cov",
    "unswizzled_makespan",
    "swizzled_makespan",
];

/// Target CoVs swept when `--cov` is not given.
pub fn default_covs() -> Vec<f64> {
    (1..=10).map(|i| i as f64 * 0.2).collect()
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 8192)]
    pub rows: usize,
    #[arg(long, default_value_t = 2048)]
    pub cols: usize,
    #[arg(long, default_value_t = 0.75)]
    pub sparsity: f64,
    /// Dense output columns.
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    /// Simulated processors; must be even.
    #[arg(long, default_value_t = 80)]
    pub sms: usize,
    #[arg(long, default_value_t = 1)]
    pub blocks_per_sm: usize,
    /// Target row-length CoVs (default: 0.2, 0.4, ..., 2.0).
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub cov: Vec<f64>,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[command(flatten)]
    pub tile: TileArgs,
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn sweep_config(&self) -> Result<SweepConfig, CliError> {
        if !(0.0..1.0).contains(&self.sparsity) {
            return Err(CliError::Usage("--sparsity must be in [0, 1)".into()));
        }
        if self.n == 0 {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        if self.cov.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(CliError::Usage("--cov values must be finite and non-negative".into()));
        }
        if !self.sms.is_multiple_of(2) {
            return Err(CliError::Usage("--sms must be even (processors come in pairs)".into()));
        }
        Ok(SweepConfig {
            rows: self.rows,
            cols: self.cols,
            sparsity: self.sparsity,
            n: self.n,
            covs: if self.cov.is_empty() {
                default_covs()
            } else {
                self.cov.clone()
            },
            seed: self.seed,
            model: SchedulerModel::new(self.sms, self.blocks_per_sm)?,
            tile: self.tile.resolve(self.n, KernelKind::Spmm, false)?,
        })
    }
}

fn record(p: &SweepPoint) -> [String; 7] {
    [
        fmt_f64(p.cov),
        fmt_f64(p.unswizzled_imbalance),
        fmt_f64(p.swizzled_imbalance),
        p.wave_count.to_string(),
        fmt_f64(p.measured_cov),
        fmt_f64(p.unswizzled_makespan),
        fmt_f64(p.swizzled_makespan),
    ]
}

pub(crate) fn run_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let cfg = args.sweep_config()?;
    let points = cov_sweep(&cfg)?;
    let mut w = csv_writer(args.output.as_deref())?;
    w.write_record(SIMULATE_HEADER)?;
    for p in &points {
        w.write_record(record(p))?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_has_ten_points() {
        let covs = default_covs();
        assert_eq!(covs.len(), 10);
        assert!((covs[0] - 0.2).abs() < 1e-12 && (covs[9] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_odd_processor_counts() {
        let args = SimulateArgs {
            rows: 8,
            cols: 8,
            sparsity: 0.5,
            n: 8,
            sms: 3,
            blocks_per_sm: 1,
            cov: vec![],
            seed: 0,
            tile: TileArgs::default(),
            output: None,
        };
        assert!(matches!(args.sweep_config(), Err(CliError::Usage(_))));
    }
}
