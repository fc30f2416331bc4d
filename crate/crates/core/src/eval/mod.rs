//! Threshold-free scoring, SNR sweeps, the complexity ablation and report
//! files.

pub mod auc;
pub mod report;
pub mod sweep;

pub use auc::{null_auc_sd, roc_auc};
pub use report::{
    config_hash, emit_plot_data, emit_report, read_report, EvalReport, EvalRow, PlotAxis, PlotData,
    ReportFormat, ReportProvenance,
};
pub use sweep::{ablation, ablation_anchors, snr_sweep, sweep_points, sweep_with, Scorer, SweepConfig, TestSet};
