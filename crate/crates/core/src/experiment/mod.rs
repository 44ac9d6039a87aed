//! Configuration-driven convergence study: runner, slope fits and plots.

mod config;
mod plot;
mod run;

pub use config::{AtomSpec, ExperimentConfig, ModelSpec, CONFIG_VERSION};
pub use plot::{emit_plots, render_panel, Series};
pub use run::{
    fit_gap_slope, fit_loglog, fit_slope, means_by_horizon, model_labels, records_to_csv, run_convergence_experiment,
    slopes_csv, ConvergenceRecord, ExperimentOutput, RunOptions, SlopeFit, CSV_HEADER, MANIFEST, RECORDS,
};
