//! Row swizzling and a model of the hardware block scheduler.

mod evaluate;
mod scheduler;
mod swizzle;

pub use evaluate::{block_costs, cov_sweep, evaluate_swizzle, row_cost, SweepConfig, SweepPoint, SwizzleEvaluation};
pub use scheduler::{simulate_schedule, sm_index, ScheduleReport, SchedulerModel};
pub use swizzle::{build_row_swizzle, RowSwizzle};
