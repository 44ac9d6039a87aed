//! Command-line front end: thin JSON-in, JSON- or CSV-out wrappers.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::{
    emit_plots, fit_gap_slope, fit_slope, model_labels, run_convergence_experiment, slopes_csv, ExperimentConfig,
    RunOptions,
};
use crate::hardness::{knapsack_volume_via_ot, KnapsackInstance, QuadratureSpec, VolumeEstimate};
use crate::measure::{utilities, CostSpec, DiscreteMeasure, Potential, SamplerSpec};
use crate::noise::{choice_from_utilities, smooth_value_from_utilities, ChoiceProbabilities, MarginalModel};
use crate::solver::{averaged_sgd, finite_sample_reference, LogSchedule, ReferenceConfig, ReferenceMethod, SolverConfig, StepRule};

#[derive(Debug, Parser)]
#[command(name = "smoothot", version, about = "Semi-discrete optimal transport with smoothed duals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Io {
    /// JSON request file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Choice probabilities (the gradient of the smooth c-transform).
    Probs {
        #[command(flatten)]
        io: Io,
        /// Bisection tolerance.
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
    /// Smooth c-transform value and gradient.
    Transform {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1e-10)]
        eps: f64,
    },
    /// Averaged SGD; writes the iterate trace as CSV.
    Solve {
        #[command(flatten)]
        io: Io,
        /// Overrides the request's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the oracle bias budget.
        #[arg(long)]
        eps: Option<f64>,
        /// Record wall time in the trace.
        #[arg(long)]
        timing: bool,
    },
    /// Knapsack-polytope volume through the two-atom transport problem.
    Volume {
        #[command(flatten)]
        io: Io,
        /// Overrides the search accuracy δ.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// High-accuracy finite-sample reference optimum.
    Reference {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Convergence study from a config file or a preset.
    Experiment {
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<Preset>,
        /// Output directory; overrides the config.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Continue an interrupted run.
        #[arg(long)]
        resume: bool,
        /// Print the resolved config instead of running it.
        #[arg(long)]
        print_config: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    Gating,
    Extended,
}

/// Utilities given directly or through `(φ, x, ν, c)`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum UtilityInput {
    Direct {
        u: Vec<f64>,
    },
    Point {
        phi: Vec<f64>,
        x: Vec<f64>,
        nu: DiscreteMeasure,
        cost: CostSpec,
    },
}

#[derive(Debug, Clone, Deserialize)]
pub struct ChoiceRequest {
    pub model: MarginalModel,
    #[serde(flatten)]
    pub input: UtilityInput,
}

impl ChoiceRequest {
    fn utilities(&self) -> Result<Vec<f64>> {
        match &self.input {
            UtilityInput::Direct { u } => Ok(u.clone()),
            UtilityInput::Point { phi, x, nu, cost } => utilities(&Potential::new(phi.clone())?, x, nu, cost),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformResponse {
    pub value: f64,
    #[serde(flatten)]
    pub probs: ChoiceProbabilities,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveRequest {
    pub sampler: SamplerSpec,
    pub nu: DiscreteMeasure,
    pub cost: CostSpec,
    #[serde(default)]
    pub model: Option<MarginalModel>,
    pub horizon: usize,
    /// Defaults to the smooth rule when the model has a Lipschitz constant.
    #[serde(default)]
    pub rule: Option<StepRule>,
    #[serde(default)]
    pub eps_bar: f64,
    pub seed: u64,
    #[serde(default)]
    pub log: LogSchedule,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeRequest {
    pub instance: KnapsackInstance,
    pub delta: f64,
    pub quadrature: QuadratureSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceRequest {
    pub sampler: SamplerSpec,
    pub nu: DiscreteMeasure,
    pub cost: CostSpec,
    #[serde(default)]
    pub model: Option<MarginalModel>,
    pub horizon: usize,
    #[serde(default)]
    pub multiplier: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceResponse {
    pub value: f64,
    pub potential: Vec<f64>,
    pub method: ReferenceMethod,
    pub residual: Option<f64>,
    pub samples: usize,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Probs { io, eps } => {
            let req: ChoiceRequest = read_json(&io.config)?;
            let p = choice_from_utilities(&req.utilities()?, &req.model, eps)?;
            emit(io.out.as_deref(), &json(&p)?)
        }
        Command::Transform { io, eps } => {
            let req: ChoiceRequest = read_json(&io.config)?;
            let (value, probs) = smooth_value_from_utilities(&req.utilities()?, &req.model, eps)?;
            emit(io.out.as_deref(), &json(&TransformResponse { value, probs })?)
        }
        Command::Solve { io, seed, eps, timing } => {
            let req: SolveRequest = read_json(&io.config)?;
            let rule = match (req.rule, &req.model) {
                (Some(r), _) => r,
                (None, Some(m)) if m.lipschitz_constant().is_some() => StepRule::smooth_for(m)?,
                (None, _) => StepRule::Lipschitz,
            };
            let mut cfg = SolverConfig::new(req.horizon, rule, seed.unwrap_or(req.seed));
            cfg.eps_bar = eps.unwrap_or(req.eps_bar);
            cfg.log = req.log;
            let (_, _, trace) = averaged_sgd(&req.sampler, &req.nu, &req.cost, req.model.as_ref(), &cfg)?;
            emit(io.out.as_deref(), &trace.to_csv(None, timing)?)
        }
        Command::Volume { io, tol } => {
            let req: VolumeRequest = read_json(&io.config)?;
            req.instance.validate()?;
            let est = knapsack_volume_via_ot(&req.instance, tol.unwrap_or(req.delta), &req.quadrature)?;
            emit(io.out.as_deref(), &format!("{}\n{}\n", VolumeEstimate::CSV_HEADER, est.csv_row()))
        }
        Command::Reference { io, seed } => {
            let req: ReferenceRequest = read_json(&io.config)?;
            let sampler = match seed {
                Some(s) => req.sampler.with_seed(s),
                None => req.sampler.clone(),
            };
            let mut cfg = ReferenceConfig::default();
            if let Some(m) = req.multiplier {
                cfg.multiplier = m;
            }
            let r = finite_sample_reference(&sampler, &req.nu, &req.cost, req.model.as_ref(), req.horizon, &cfg)?;
            let resp = ReferenceResponse {
                value: r.value,
                potential: r.potential,
                method: r.method,
                residual: r.residual,
                samples: r.samples.len(),
            };
            emit(io.out.as_deref(), &json(&resp)?)
        }
        Command::Experiment {
            config,
            preset,
            out,
            workers,
            resume,
            print_config,
        } => {
            let mut cfg = match (config, preset) {
                (Some(path), _) => ExperimentConfig::load(&path)?,
                (None, Some(Preset::Gating)) => ExperimentConfig::gating("results"),
                (None, Some(Preset::Extended)) => ExperimentConfig::extended("results-extended"),
                (None, None) => return Err(Error::field("config", "pass --config <path> or --preset")),
            };
            if let Some(o) = out {
                cfg.out = o;
            }
            if print_config {
                return emit(None, &(cfg.to_json() + "\n"));
            }
            run_experiment(&cfg, &RunOptions { workers, resume, limit: None })
        }
    }
}

fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<()> {
    let output = run_convergence_experiment(cfg, opts)?;
    let slopes = slopes_csv(&output.records);
    std::fs::write(cfg.out.join("slopes.csv"), &slopes)?;
    emit_plots(&output.records, &cfg.out)?;
    let mut meta = serde_json::Map::new();
    for label in model_labels(&output.records) {
        let sel: Vec<_> = output.records.iter().filter(|r| r.model == label).collect();
        let worst = sel.iter().filter_map(|r| r.reference_residual).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))));
        meta.insert(
            label.clone(),
            serde_json::json!({
                "reference": sel.first().map(|r| r.reference),
                "max_reference_residual": worst,
                "subopt_slope": fit_slope(&sel).ok().map(|f| f.slope),
                "potgap_slope": fit_gap_slope(&sel).ok().map(|f| f.slope),
            }),
        );
    }
    std::fs::write(cfg.out.join("metadata.json"), serde_json::to_string_pretty(&meta)? + "\n")?;
    print!("{slopes}");
    Ok(())
}
