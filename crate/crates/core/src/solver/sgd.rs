use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{cost_row, max_with_index, CostSpec, DiscreteMeasure, Point, Potential, SamplerSpec};
use crate::noise::{choice_from_utilities, MarginalModel};
use crate::solver::step::{step_size, Average, StepRule};

/// Which iterates are kept in the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogSchedule {
    /// `t ∈ {1, 2, 4, …}` plus the final iterate.
    #[default]
    Geometric,
    /// Every iterate.
    Full,
}

impl LogSchedule {
    fn logs(&self, t: usize, horizon: usize) -> bool {
        match self {
            LogSchedule::Full => true,
            LogSchedule::Geometric => t.is_power_of_two() || t == horizon,
        }
    }
}

/// Configuration of one averaged SGD run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Number of iterations `T`.
    pub horizon: usize,
    pub rule: StepRule,
    /// Oracle bias budget `ε̄`; iteration `t` uses tolerance `ε̄/(2√t)`.
    #[serde(default)]
    pub eps_bar: f64,
    /// Tikhonov weight for the unregularized problem.
    #[serde(default = "default_tikhonov")]
    pub tikhonov: f64,
    pub seed: u64,
    #[serde(default)]
    pub log: LogSchedule,
}

fn default_tikhonov() -> f64 {
    1e-8
}

impl SolverConfig {
    pub fn new(horizon: usize, rule: StepRule, seed: u64) -> Self {
        Self {
            horizon,
            rule,
            eps_bar: 0.0,
            tikhonov: default_tikhonov(),
            seed,
            log: LogSchedule::Geometric,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::field("horizon", "must be at least 1"));
        }
        if !(self.tikhonov >= 0.0 && self.tikhonov.is_finite()) {
            return Err(Error::field("tikhonov", "must be nonnegative and finite"));
        }
        step_size(&self.rule, self.horizon, self.eps_bar).map(|_| ())
    }
}

/// A logged iterate `φ_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: usize,
    pub phi: Vec<f64>,
    pub walltime_ms: f64,
}

/// Output of [`averaged_sgd`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverTrace {
    pub step: f64,
    pub snapshots: Vec<Snapshot>,
    /// `(1/T) Σ_{t=1}^T φ_{t−1}`
    pub lower_average: Vec<f64>,
    /// `(1/T) Σ_{t=1}^T φ_t`
    pub upper_average: Vec<f64>,
    pub samples: usize,
    pub walltime_ms: f64,
}

impl SolverTrace {
    /// The average carrying the guarantee of the given rule.
    pub fn output(&self, rule: &StepRule) -> &[f64] {
        match rule.average() {
            Average::Lower => &self.lower_average,
            Average::Upper => &self.upper_average,
        }
    }

    /// CSV with columns `t,phi_hash,subopt_estimate,walltime_ms`. The
    /// suboptimality column is left empty without an evaluator; the time
    /// column is written as `0` when `timing` is off.
    pub fn to_csv(&self, subopt: Option<&dyn Fn(&[f64]) -> Result<f64>>, timing: bool) -> Result<String> {
        let mut out = String::from("t,phi_hash,subopt_estimate,walltime_ms\n");
        for s in &self.snapshots {
            let sub = match subopt {
                Some(f) => format!("{:e}", f(&s.phi)?),
                None => String::new(),
            };
            let ms = if timing { s.walltime_ms } else { 0.0 };
            writeln!(out, "{},{},{},{:.3}", s.t, phi_hash(&s.phi), sub, ms).expect("writing to a string");
        }
        Ok(out)
    }
}

/// FNV-1a hash of the bit patterns of a potential, as 16 hex digits.
pub fn phi_hash(phi: &[f64]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in phi {
        for byte in v.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}

/// Averaged SGD on the (smooth) semi-discrete dual, drawing `T` samples
/// from the sampler reseeded with `config.seed`.
pub fn averaged_sgd(
    sampler: &SamplerSpec,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    model: Option<&MarginalModel>,
    config: &SolverConfig,
) -> Result<(Potential, Potential, SolverTrace)> {
    let mut stream = sampler.with_seed(config.seed).sampler()?;
    if stream.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: nu.dim(),
            got: stream.dim(),
        });
    }
    averaged_sgd_on(std::iter::from_fn(|| Some(stream.next_point())), nu, cost, model, config)
}

/// Averaged SGD driven by an explicit stream of source points; uses the
/// first `T` items.
pub fn averaged_sgd_on(
    points: impl IntoIterator<Item = Point>,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    model: Option<&MarginalModel>,
    config: &SolverConfig,
) -> Result<(Potential, Potential, SolverTrace)> {
    config.validate()?;
    cost.validate()?;
    if let Some(m) = model {
        if m.len() != nu.len() {
            return Err(Error::LengthMismatch {
                what: "model reference weights",
                expected: nu.len(),
                got: m.len(),
            });
        }
    }
    let n = nu.len();
    let horizon = config.horizon;
    let gamma = step_size(&config.rule, horizon, config.eps_bar)?;
    let start = Instant::now();
    let mut phi = vec![0.0; n];
    let mut lower = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut u = vec![0.0; n];
    let mut snapshots = Vec::new();
    let mut points = points.into_iter();
    for t in 1..=horizon {
        let x = points.next().ok_or_else(|| Error::field("samples", format!("stream ended after {} points", t - 1)))?;
        let row = cost_row(&x, nu, cost).map_err(|e| Error::Oracle {
            iteration: t,
            source: Box::new(e),
        })?;
        for i in 0..n {
            u[i] = phi[i] - row[i];
            lower[i] += phi[i];
        }
        match model {
            Some(m) => {
                let eps = config.eps_bar / (2.0 * (t as f64).sqrt());
                let p = choice_from_utilities(&u, m, eps).map_err(|e| Error::Oracle {
                    iteration: t,
                    source: Box::new(e),
                })?;
                for i in 0..n {
                    phi[i] += gamma * (nu.weights()[i] - p.p[i]);
                }
            }
            None => {
                let (_, k) = max_with_index(&u);
                let tik = 2.0 * config.tikhonov;
                for i in 0..n {
                    let p = if i == k { 1.0 } else { 0.0 };
                    phi[i] += gamma * (nu.weights()[i] - p - tik * phi[i]);
                }
            }
        }
        for i in 0..n {
            upper[i] += phi[i];
        }
        if config.log.logs(t, horizon) {
            snapshots.push(Snapshot {
                t,
                phi: phi.clone(),
                walltime_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    let scale = 1.0 / horizon as f64;
    lower.iter_mut().for_each(|v| *v *= scale);
    upper.iter_mut().for_each(|v| *v *= scale);
    let trace = SolverTrace {
        step: gamma,
        snapshots,
        lower_average: lower.clone(),
        upper_average: upper.clone(),
        samples: horizon,
        walltime_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok((Potential::new(lower)?, Potential::new(upper)?, trace))
}
