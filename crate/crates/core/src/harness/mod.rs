//! Experiment orchestration: phase-transition sweeps, the `C0` scatter
//! experiment, the ratio-statistic test and plotting.

pub mod c0;
pub mod config;
pub mod plot;
pub mod ratio;
pub mod sweep;

use std::path::Path;

use serde::Serialize;

use crate::error::Result;

pub use c0::{c0_ratio, run_c0_experiment, C0Point, C0Scatter, SkippedPoint};
pub use config::{ExperimentConfig, SRule, WORKERS_ENV};
pub use plot::{emit_plot, PlotData};
pub use ratio::{run_ratio_test, RatioStats};
pub use sweep::{run_sweep, run_trial, CellSummary, PhaseDiagram, TrialRecord, TrialStatus};

pub(crate) fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
