use std::path::PathBuf;

use clap::{ArgGroup, Args, ValueEnum};
use sparsekit_core::matrix::{random_csr, RowProfile};
use sparsekit_core::spmm::{default_tile_config, KernelKind, TileConfig};
use sparsekit_core::{CsrMatrix, Precision};

use super::CliError;
use crate::io::read_matrix;
use crate::PoolExecutor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KernelArg {
    Spmm,
    Sddmm,
}

impl KernelArg {
    pub fn kind(self) -> KernelKind {
        match self {
            Self::Spmm => KernelKind::Spmm,
            Self::Sddmm => KernelKind::Sddmm,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Spmm => "spmm",
            Self::Sddmm => "sddmm",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PrecisionArg {
    F32,
    F16,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::F32 => Precision::F32,
            PrecisionArg::F16 => Precision::F16,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
}

/// `RxC`, e.g. `1024x512`.
pub fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected ROWSxCOLS, got `{s}`"))?;
    let r = r.trim().parse().map_err(|_| format!("invalid row count in `{s}`"))?;
    let c = c.trim().parse().map_err(|_| format!("invalid column count in `{s}`"))?;
    Ok((r, c))
}

fn parse_vector_width(s: &str) -> Result<usize, String> {
    match s {
        "1" | "2" | "4" => Ok(s.parse().expect("literal digit")),
        _ => Err(format!("vector width must be 1, 2 or 4, got `{s}`")),
    }
}

#[derive(Args, Debug, Clone)]
#[command(group(ArgGroup::new("source").required(true).args(["matrix", "gen"])))]
pub struct ProblemArgs {
    /// Sparse matrix file (.smtx or .mtx).
    #[arg(long, value_name = "PATH")]
    pub matrix: Option<PathBuf>,
    /// Generate a random ROWSxCOLS sparse matrix.
    #[arg(long = "gen", value_name = "RxC", value_parser = parse_dims)]
    pub gen: Option<(usize, usize)>,
    /// Fraction of zeros in the generated matrix.
    #[arg(long, default_value_t = 0.9)]
    pub sparsity: f64,
    /// Row-length coefficient of variation of the generated matrix
    /// (log-normal rows); uniform placement when absent.
    #[arg(long)]
    pub cov: Option<f64>,
    /// Dense columns for SpMM; shared inner dimension for SDDMM.
    #[arg(long, default_value_t = 128)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = PrecisionArg::F32)]
    pub precision: PrecisionArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl ProblemArgs {
    pub fn load(&self) -> Result<CsrMatrix<f32>, CliError> {
        if self.n == 0 {
            return Err(CliError::Usage("--n must be at least 1".into()));
        }
        if let Some(path) = &self.matrix {
            return Ok(read_matrix(path)?);
        }
        let (rows, cols) = self.gen.expect("clap enforces --matrix or --gen");
        if !(0.0..1.0).contains(&self.sparsity) {
            return Err(CliError::Usage("--sparsity must be in [0, 1)".into()));
        }
        let profile = match self.cov {
            Some(c) => RowProfile::LogNormal { cov_target: c },
            None => RowProfile::Uniform,
        };
        random_csr(rows, cols, self.sparsity, self.seed, profile).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Args, Debug, Clone, Default)]
pub struct TileArgs {
    #[arg(long)]
    pub tile_k: Option<usize>,
    #[arg(long)]
    pub tile_x: Option<usize>,
    #[arg(long)]
    pub tile_y: Option<usize>,
    #[arg(long, value_parser = parse_vector_width)]
    pub vector_width: Option<usize>,
}

impl TileArgs {
    /// Default tile for `dim` with any flags applied on top.
    pub fn resolve(&self, dim: usize, kind: KernelKind, no_vector: bool) -> Result<TileConfig, CliError> {
        let mut cfg = default_tile_config(dim, kind);
        let vw = if no_vector { Some(1) } else { self.vector_width };
        if let Some(vw) = vw {
            cfg = cfg.with_vector_width(vw)?;
        }
        if let Some(k) = self.tile_k {
            cfg.block_items_k = k;
        }
        if let Some(x) = self.tile_x {
            cfg.block_items_x = x;
        }
        if let Some(y) = self.tile_y {
            cfg.block_items_y = y;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug, Clone, Copy, Default)]
pub struct ToggleArgs {
    /// Process rows in natural order instead of the row swizzle.
    #[arg(long)]
    pub no_load_balance: bool,
    /// Force vector width 1.
    #[arg(long)]
    pub no_vector: bool,
    /// Handle trailing nonzeros with a scalar loop.
    #[arg(long)]
    pub no_residue_unroll: bool,
    /// Scale column indices inside the loop instead of ahead of it.
    #[arg(long)]
    pub no_prescale: bool,
}

impl ToggleArgs {
    pub fn disabled(&self) -> String {
        let names = [
            (self.no_load_balance, "load-balance"),
            (self.no_vector, "vector"),
            (self.no_residue_unroll, "residue-unroll"),
            (self.no_prescale, "prescale"),
        ];
        let off: Vec<&str> = names.iter().filter(|(on, _)| *on).map(|(_, n)| *n).collect();
        if off.is_empty() {
            "none".into()
        } else {
            off.join(";")
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file (default: stdout).
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    pub format: FormatArg,
}

impl RunArgs {
    pub fn executor(&self) -> Result<PoolExecutor, CliError> {
        if self.threads == Some(0) {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        PoolExecutor::new(self.threads).map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims() {
        assert_eq!(parse_dims("1024x512"), Ok((1024, 512)));
        assert_eq!(parse_dims("3X4"), Ok((3, 4)));
        assert!(parse_dims("12").is_err());
        assert!(parse_dims("ax3").is_err());
    }

    #[test]
    fn tile_overrides() {
        let t = TileArgs {
            tile_y: Some(4),
            ..Default::default()
        };
        let cfg = t.resolve(128, KernelKind::Spmm, false).unwrap();
        assert_eq!((cfg.block_items_x, cfg.block_items_y, cfg.vector_width), (64, 4, 4));
        let cfg = t.resolve(128, KernelKind::Spmm, true).unwrap();
        assert_eq!(cfg.vector_width, 1);
        let bad = TileArgs {
            tile_k: Some(6),
            ..Default::default()
        };
        assert!(bad.resolve(128, KernelKind::Spmm, false).is_err());
    }

    #[test]
    fn disabled_list() {
        assert_eq!(ToggleArgs::default().disabled(), "none");
        let t = ToggleArgs {
            no_vector: true,
            no_prescale: true,
            ..Default::default()
        };
        assert_eq!(t.disabled(), "vector;prescale");
    }
}
