use alloc::vec::Vec;

use super::scheduler::{simulate_schedule, ScheduleReport, SchedulerModel};
use super::swizzle::{build_row_swizzle, RowSwizzle};
use crate::element::{Element, SparseIndex};
use crate::error::{Result, SparseError};
use crate::matrix::{random_csr, row_length_stats, CsrMatrix, RowProfile};
use crate::spmm::{roma_align, TileConfig};

/// K-step count of one row: ROMA-adjusted nonzeros over `block_items_k`.
pub fn row_cost<T: Element, I: SparseIndex>(m: &CsrMatrix<T, I>, row: usize, cfg: &TileConfig) -> usize {
    let range = m.row_range(row);
    let adj = roma_align(range.start, range.len(), cfg.vector_width);
    adj.adjusted_nnz.div_ceil(cfg.block_items_k)
}

/// Per-block costs for an SpMM launch over `n` output columns, in block
/// index order (column tile fastest). Row groups follow `swizzle` when given.
pub fn block_costs<T: Element, I: SparseIndex>(
    m: &CsrMatrix<T, I>,
    cfg: &TileConfig,
    n: usize,
    swizzle: Option<&RowSwizzle>,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if let Some(sw) = swizzle {
        if sw.len() != m.rows() {
            return Err(SparseError::InvalidArgument("swizzle length differs from matrix rows"));
        }
    }
    let row_at = |slot: usize| swizzle.map_or(slot, |sw| sw.order()[slot]);
    let col_tiles = n.div_ceil(cfg.block_items_x);
    let groups = m.rows().div_ceil(cfg.block_items_y);
    let mut costs = Vec::with_capacity(groups * col_tiles);
    for g in 0..groups {
        let lo = g * cfg.block_items_y;
        let hi = (lo + cfg.block_items_y).min(m.rows());
        let cost: usize = (lo..hi).map(|slot| row_cost(m, row_at(slot), cfg)).sum();
        costs.extend(core::iter::repeat_n(cost as f64, col_tiles));
    }
    Ok(costs)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SwizzleEvaluation {
    pub unswizzled: ScheduleReport,
    pub swizzled: ScheduleReport,
}

/// Simulates the launch in natural row order and in sorted-swizzle order.
pub fn evaluate_swizzle<T: Element, I: SparseIndex>(
    m: &CsrMatrix<T, I>,
    cfg: &TileConfig,
    model: &SchedulerModel,
    n: usize,
) -> Result<SwizzleEvaluation> {
    let natural = block_costs(m, cfg, n, None)?;
    let sw = build_row_swizzle(m);
    let sorted = block_costs(m, cfg, n, Some(&sw))?;
    Ok(SwizzleEvaluation {
        unswizzled: simulate_schedule(&natural, model)?,
        swizzled: simulate_schedule(&sorted, model)?,
    })
}

/// Parameters of a row-length-variation sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub rows: usize,
    pub cols: usize,
    pub sparsity: f64,
    /// Dense output columns.
    pub n: usize,
    pub covs: Vec<f64>,
    pub seed: u64,
    pub model: SchedulerModel,
    pub tile: TileConfig,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub cov: f64,
    /// Row-length CoV of the generated matrix.
    pub measured_cov: f64,
    pub unswizzled_imbalance: f64,
    pub swizzled_imbalance: f64,
    pub unswizzled_makespan: f64,
    pub swizzled_makespan: f64,
    pub wave_count: usize,
}

/// Generates one log-normal matrix per target CoV and evaluates both orders.
pub fn cov_sweep(cfg: &SweepConfig) -> Result<Vec<SweepPoint>> {
    cfg.model.validate()?;
    cfg.covs
        .iter()
        .map(|&cov| {
            let m = random_csr(
                cfg.rows,
                cfg.cols,
                cfg.sparsity,
                cfg.seed,
                RowProfile::LogNormal { cov_target: cov },
            )?;
            let stats = row_length_stats(m.rows(), m.cols(), m.row_lengths());
            let eval = evaluate_swizzle(&m, &cfg.tile, &cfg.model, cfg.n)?;
            Ok(SweepPoint {
                cov,
                measured_cov: stats.row_cov.unwrap_or(0.0),
                unswizzled_imbalance: eval.unswizzled.imbalance,
                swizzled_imbalance: eval.swizzled.imbalance,
                unswizzled_makespan: eval.unswizzled.makespan,
                swizzled_makespan: eval.swizzled.makespan,
                wave_count: eval.unswizzled.wave_count,
            })
        })
        .collect()
}
