use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::config::{ExperimentConfig, ModelSpec};
use crate::measure::DiscreteMeasure;
use crate::solver::{averaged_sgd, finite_sample_reference, gauge_gap, ReferenceMethod, SolverConfig};

pub const CSV_HEADER: &str = "model,T,seed,subopt,potgap,ms";
pub const MANIFEST: &str = "manifest.jsonl";
pub const RECORDS: &str = "records.csv";

/// Outcome of one `(model, T, seed)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub model: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub seed: u64,
    /// Reference value minus the finite-sample dual at the rule's average.
    pub subopt: f64,
    /// `‖φ̄_T − φ⋆‖²` in the mean-zero gauge.
    pub potgap: f64,
    pub ms: f64,
    pub reference: ReferenceMethod,
    /// Gradient norm of the reference potential, when it is not exact.
    pub reference_residual: Option<f64>,
}

impl ConvergenceRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:e},{:e},{:.3}",
            self.model, self.horizon, self.seed, self.subopt, self.potgap, self.ms
        )
    }
}

/// Renders records in the given order under [`CSV_HEADER`].
pub fn records_to_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Execution controls that do not affect the results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses all cores.
    pub workers: Option<usize>,
    /// Continue from an existing manifest in the output directory.
    pub resume: bool,
    /// Stop after this many newly completed cells.
    pub limit: Option<usize>,
}

/// Result of [`run_convergence_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    /// Completed records in configuration order.
    pub records: Vec<ConvergenceRecord>,
    pub complete: bool,
    pub csv_path: PathBuf,
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    index: usize,
    model: usize,
    horizon: usize,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    index: usize,
    record: ConvergenceRecord,
}

fn cells(cfg: &ExperimentConfig) -> Vec<Cell> {
    let mut out = Vec::new();
    for (model, _) in cfg.models.iter().enumerate() {
        for &horizon in &cfg.horizons {
            for &seed in &cfg.seeds {
                out.push(Cell {
                    index: out.len(),
                    model,
                    horizon,
                    seed,
                });
            }
        }
    }
    out
}

fn run_cell(cfg: &ExperimentConfig, nu: &DiscreteMeasure, spec: &ModelSpec, cell: &Cell) -> Result<ConvergenceRecord> {
    let start = Instant::now();
    let model = spec.build(nu.len())?;
    let rule = spec.step_rule(model.as_ref())?;
    let sampler = cfg.sampler.with_seed(cell.seed);
    let reference = finite_sample_reference(
        &sampler,
        nu,
        &cfg.cost,
        model.as_ref(),
        cell.horizon,
        &cfg.reference_config(),
    )?;
    let mut sgd = SolverConfig::new(cell.horizon, rule, cell.seed);
    sgd.eps_bar = if spec.inexact() { cfg.eps_bar } else { 0.0 };
    let (_, _, trace) = averaged_sgd(&sampler, nu, &cfg.cost, model.as_ref(), &sgd)?;
    let phi = trace.output(&rule);
    let subopt = reference.value - reference.dual.value(phi)?;
    let potgap = gauge_gap(phi, &reference.potential);
    Ok(ConvergenceRecord {
        model: spec.label().to_string(),
        horizon: cell.horizon,
        seed: cell.seed,
        subopt,
        potgap,
        ms: if cfg.timing {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        },
        reference: reference.method,
        reference_residual: reference.residual,
    })
}

fn read_manifest(path: &Path, cfg: &ExperimentConfig) -> Result<BTreeMap<usize, ConvergenceRecord>> {
    let file = BufReader::new(File::open(path)?);
    let mut lines = file.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::field("manifest", "empty manifest"))?;
    let stored: ExperimentConfig = serde_json::from_str(&header)?;
    if &stored != cfg {
        return Err(Error::field("manifest", "manifest was written for a different configuration"));
    }
    let mut done = BTreeMap::new();
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        // a torn final line from an interrupted write is dropped
        match serde_json::from_str::<ManifestEntry>(&line) {
            Ok(e) => {
                done.insert(e.index, e.record);
            }
            Err(_) => log::warn!("skipping unreadable manifest line"),
        }
    }
    Ok(done)
}

/// Runs every `(model, T, seed)` cell of the configuration.
///
/// Cells run in parallel; each finished cell is appended to
/// `manifest.jsonl` by a single writer, so an interrupted run can be
/// resumed. Once all cells are done, `records.csv` is written in
/// configuration order.
pub fn run_convergence_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let nu = cfg.atoms.build()?;
    fs::create_dir_all(&cfg.out)?;
    let manifest_path = cfg.out.join(MANIFEST);
    let mut done = if opts.resume && manifest_path.exists() {
        read_manifest(&manifest_path, cfg)?
    } else {
        let mut f = File::create(&manifest_path)?;
        writeln!(f, "{}", serde_json::to_string(cfg)?)?;
        BTreeMap::new()
    };
    let all = cells(cfg);
    let mut pending: Vec<Cell> = all.iter().filter(|c| !done.contains_key(&c.index)).copied().collect();
    if let Some(k) = opts.limit {
        pending.truncate(k);
    }

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = opts.workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| Error::field("workers", e.to_string()))?;
    let mut manifest = OpenOptions::new().append(true).open(&manifest_path)?;
    let (tx, rx) = mpsc::channel::<(usize, Result<ConvergenceRecord>)>();
    let mut first_error = None;
    std::thread::scope(|scope| -> Result<()> {
        let nu = &nu;
        let pending = &pending;
        let pool = &pool;
        scope.spawn(move || {
            pool.install(|| {
                pending.par_iter().for_each_with(tx, |tx, cell| {
                    let r = run_cell(cfg, nu, &cfg.models[cell.model], cell);
                    let _ = tx.send((cell.index, r));
                });
            });
        });
        for (index, result) in rx {
            match result {
                Ok(record) => {
                    writeln!(manifest, "{}", serde_json::to_string(&ManifestEntry { index, record: record.clone() })?)?;
                    manifest.flush()?;
                    done.insert(index, record);
                }
                Err(e) => {
                    log::error!("cell {index} failed: {e}");
                    first_error.get_or_insert(e);
                }
            }
        }
        Ok(())
    })?;
    if let Some(e) = first_error {
        return Err(e);
    }

    let complete = done.len() == all.len();
    let records: Vec<ConvergenceRecord> = done.into_values().collect();
    let csv_path = cfg.out.join(RECORDS);
    if complete {
        fs::write(&csv_path, records_to_csv(&records))?;
    }
    Ok(ExperimentOutput {
        records,
        complete,
        csv_path,
    })
}

/// Least-squares fit on log-log axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Fits `log y = a + b log x`; points with `y ≤ 0` are dropped with a
/// warning. Needs at least three distinct `x`.
pub fn fit_loglog(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| {
            let keep = **y > 0.0 && **x > 0.0 && y.is_finite();
            if !keep {
                log::warn!("excluding nonpositive mean {y} at T = {x} from the slope fit");
            }
            keep
        })
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let mut distinct: Vec<f64> = pts.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::field("records", "slope fit needs at least three distinct positive points"));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(SlopeFit {
        slope,
        intercept: my - slope * mx,
        r2,
        points: pts.len(),
    })
}

/// Mean of a column per horizon, in increasing `T`.
pub fn means_by_horizon(records: &[&ConvergenceRecord], column: impl Fn(&ConvergenceRecord) -> f64) -> Vec<(usize, f64)> {
    let mut groups: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in records {
        let g = groups.entry(r.horizon).or_default();
        g.0 += column(r);
        g.1 += 1;
    }
    groups.into_iter().map(|(t, (s, k))| (t, s / k as f64)).collect()
}

/// Slope of log mean suboptimality against log `T` for records of one model.
pub fn fit_slope(records: &[&ConvergenceRecord]) -> Result<SlopeFit> {
    fit_column(records, |r| r.subopt)
}

/// Slope of log mean potential gap against log `T`.
pub fn fit_gap_slope(records: &[&ConvergenceRecord]) -> Result<SlopeFit> {
    fit_column(records, |r| r.potgap)
}

fn fit_column(records: &[&ConvergenceRecord], column: impl Fn(&ConvergenceRecord) -> f64) -> Result<SlopeFit> {
    let means = means_by_horizon(records, column);
    let xs: Vec<f64> = means.iter().map(|m| m.0 as f64).collect();
    let ys: Vec<f64> = means.iter().map(|m| m.1).collect();
    fit_loglog(&xs, &ys)
}

/// Series labels in first-appearance order.
pub fn model_labels(records: &[ConvergenceRecord]) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for r in records {
        if !out.contains(&r.model) {
            out.push(r.model.clone());
        }
    }
    out
}

/// `model,subopt_slope,subopt_r2,potgap_slope,potgap_r2` per series.
pub fn slopes_csv(records: &[ConvergenceRecord]) -> String {
    let mut out = String::from("model,subopt_slope,subopt_r2,potgap_slope,potgap_r2\n");
    for label in model_labels(records) {
        let sel: Vec<&ConvergenceRecord> = records.iter().filter(|r| r.model == label).collect();
        let fmt = |f: Result<SlopeFit>| match f {
            Ok(f) => (format!("{:.4}", f.slope), format!("{:.4}", f.r2)),
            Err(_) => (String::new(), String::new()),
        };
        let (s, sr) = fmt(fit_slope(&sel));
        let (g, gr) = fmt(fit_gap_slope(&sel));
        out.push_str(&format!("{label},{s},{sr},{g},{gr}\n"));
    }
    out
}
