//! A small convergence study: runs the experiment grid, fits log-log slopes
//! and writes the SVG panels to a temporary directory.

use smoothot::experiment::{emit_plots, run_convergence_experiment, slopes_csv, ExperimentConfig, RunOptions};

fn main() -> smoothot::Result<()> {
    let out = std::env::temp_dir().join("smoothot-convergence-study");
    let mut cfg = ExperimentConfig::gating(&out);
    cfg.horizons = vec![100, 316, 1000];
    cfg.seeds = vec![1, 2, 3];
    cfg.timing = false;
    let result = run_convergence_experiment(&cfg, &RunOptions::default())?;
    print!("{}", slopes_csv(&result.records));
    for path in emit_plots(&result.records, &out)? {
        println!("wrote {}", path.display());
    }
    println!("records in {}", result.csv_path.display());
    Ok(())
}
