use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{draw, CostSpec, DiscreteMeasure, SamplerSpec};
use crate::noise::{MarginalModel, ModelKind};
use crate::solver::{ReferenceConfig, StepRule};

/// Schema version understood by this build.
pub const CONFIG_VERSION: u32 = 1;

/// Target measure `ν`: explicit, or uniform on random points of a box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AtomSpec {
    Measure { measure: DiscreteMeasure },
    RandomAtoms { count: usize, dim: usize, low: f64, high: f64, seed: u64 },
}

impl AtomSpec {
    pub fn build(&self) -> Result<DiscreteMeasure> {
        match self {
            AtomSpec::Measure { measure } => Ok(measure.clone()),
            AtomSpec::RandomAtoms {
                count,
                dim,
                low,
                high,
                seed,
            } => {
                if *count == 0 {
                    return Err(Error::field("atoms.count", "must be positive"));
                }
                if !(low < high && low.is_finite() && high.is_finite()) {
                    return Err(Error::field("atoms.low", "box must satisfy low < high"));
                }
                let unit = draw(&SamplerSpec::HypercubeUniform { dim: *dim, seed: *seed }, *count)?;
                let pts = unit
                    .into_iter()
                    .map(|x| x.into_iter().map(|v| low + (high - low) * v).collect())
                    .collect();
                DiscreteMeasure::uniform(pts)
            }
        }
    }
}

/// One series of the experiment. `kind` is `none` for the unregularized
/// problem or a model tag; reference weights are uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    /// Series label; defaults to `kind`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Overrides the default step rule of the model class.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<StepRule>,
}

impl ModelSpec {
    pub fn none() -> Self {
        Self::with_kind("none", None)
    }

    pub fn with_kind(kind: &str, lambda: Option<f64>) -> Self {
        Self {
            kind: kind.to_string(),
            lambda,
            q: None,
            name: None,
            rule: None,
        }
    }

    pub fn label(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.kind)
    }

    /// The marginal model with `η = 1/N`, or `None` for the unregularized problem.
    pub fn build(&self, n: usize) -> Result<Option<MarginalModel>> {
        let kind = match self.kind.as_str() {
            "none" => return Ok(None),
            "exponential" => ModelKind::Exponential,
            "uniform" => ModelKind::Uniform,
            "pareto" => ModelKind::Pareto {
                q: self.q.ok_or_else(|| Error::field("models.q", "required for the pareto model"))?,
            },
            "hyperbolic" => ModelKind::Hyperbolic,
            "tdist" => ModelKind::TDist,
            other => return Err(Error::field("models.kind", format!("unknown model kind `{other}`"))),
        };
        let lambda = self
            .lambda
            .ok_or_else(|| Error::field("models.lambda", format!("required for the {} model", self.kind)))?;
        MarginalModel::with_uniform_eta(kind, lambda, n).map(Some)
    }

    /// Step rule: the override if present, else the smooth rule when the
    /// model has a Lipschitz constant and the Lipschitz rule otherwise.
    pub fn step_rule(&self, model: Option<&MarginalModel>) -> Result<StepRule> {
        if let Some(r) = self.rule {
            return Ok(r);
        }
        match model {
            Some(m) if m.lipschitz_constant().is_some() => StepRule::smooth_for(m),
            _ => Ok(StepRule::Lipschitz),
        }
    }

    /// Whether the gradient oracle of this series is computed by bisection.
    pub fn inexact(&self) -> bool {
        !matches!(self.kind.as_str(), "none" | "exponential" | "uniform")
    }
}

fn default_multiplier() -> usize {
    10
}

fn default_eps_bar() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

fn default_sgd_factor() -> usize {
    50
}

/// Full description of a convergence experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub sampler: SamplerSpec,
    pub atoms: AtomSpec,
    pub cost: CostSpec,
    pub models: Vec<ModelSpec>,
    pub horizons: Vec<usize>,
    pub seeds: Vec<u64>,
    #[serde(default = "default_multiplier")]
    pub multiplier: usize,
    /// Oracle bias budget of the bisection-based series.
    #[serde(default = "default_eps_bar")]
    pub eps_bar: f64,
    /// Iterations of the long SGD reference, as a multiple of `T`.
    #[serde(default = "default_sgd_factor")]
    pub sgd_factor: usize,
    /// Record wall time; when off the `ms` column is `0`.
    #[serde(default = "default_true")]
    pub timing: bool,
    pub out: PathBuf,
}

impl ExperimentConfig {
    /// The scaled convergence study: Gaussian source, ten random atoms on
    /// `[−1,1]²`, sup-norm cost, unregularized, entropic and χ² series with
    /// `λ = 0.1`, `T ∈ {10², 10^2.5, …, 10⁴}` and ten seeds.
    pub fn gating(out: impl Into<PathBuf>) -> Self {
        Self {
            version: CONFIG_VERSION,
            sampler: SamplerSpec::GaussianStandard { dim: 2, seed: 0 },
            atoms: AtomSpec::RandomAtoms {
                count: 10,
                dim: 2,
                low: -1.0,
                high: 1.0,
                seed: 1,
            },
            cost: CostSpec::SupNorm,
            models: vec![
                ModelSpec::none(),
                ModelSpec::with_kind("exponential", Some(0.1)),
                ModelSpec::with_kind("uniform", Some(0.1)),
            ],
            horizons: vec![100, 316, 1000, 3162, 10_000],
            seeds: (1..=10).collect(),
            multiplier: 10,
            eps_bar: 0.1,
            sgd_factor: 50,
            timing: true,
            out: out.into(),
        }
    }

    /// The gating study extended to `T = 10⁵` with a hyperbolic series.
    pub fn extended(out: impl Into<PathBuf>) -> Self {
        let mut cfg = Self::gating(out);
        cfg.models.push(ModelSpec::with_kind("hyperbolic", Some(0.1)));
        cfg.horizons.extend([31_623, 100_000]);
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::field(
                "version",
                format!("expected {CONFIG_VERSION}, found {}", self.version),
            ));
        }
        self.sampler.validate()?;
        self.cost.validate()?;
        let nu = self.atoms.build()?;
        if nu.dim() != self.sampler.dim() {
            return Err(Error::DimensionMismatch {
                expected: nu.dim(),
                got: self.sampler.dim(),
            });
        }
        if self.models.is_empty() {
            return Err(Error::field("models", "at least one model is required"));
        }
        let mut labels: Vec<&str> = self.models.iter().map(ModelSpec::label).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::field("models", "series labels must be distinct"));
        }
        for m in &self.models {
            if m.label().contains([',', '\n', '"']) {
                return Err(Error::field("models.name", "labels may not contain commas, quotes or newlines"));
            }
            let model = m.build(nu.len())?;
            m.step_rule(model.as_ref())?;
        }
        if self.horizons.is_empty() || self.horizons[0] == 0 {
            return Err(Error::field("horizons", "must be nonempty and positive"));
        }
        if self.horizons.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::field("horizons", "must be strictly increasing"));
        }
        if self.seeds.is_empty() {
            return Err(Error::field("seeds", "at least one seed is required"));
        }
        if self.multiplier == 0 {
            return Err(Error::field("multiplier", "must be positive"));
        }
        if !(self.eps_bar >= 0.0 && self.eps_bar.is_finite()) {
            return Err(Error::field("eps_bar", "must be nonnegative and finite"));
        }
        Ok(())
    }

    pub fn reference_config(&self) -> ReferenceConfig {
        ReferenceConfig {
            multiplier: self.multiplier,
            sgd_factor: self.sgd_factor,
            eps_bar: self.eps_bar,
            ..ReferenceConfig::default()
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = ExperimentConfig::extended("out");
        let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn rejects_bad_fields() {
        let mut cfg = ExperimentConfig::gating("out");
        cfg.horizons = vec![100, 100];
        assert!(matches!(cfg.validate(), Err(Error::InvalidField { field, .. }) if field == "horizons"));
        let mut cfg = ExperimentConfig::gating("out");
        cfg.seeds.clear();
        assert!(matches!(cfg.validate(), Err(Error::InvalidField { field, .. }) if field == "seeds"));
        let mut cfg = ExperimentConfig::gating("out");
        cfg.models.push(ModelSpec::with_kind("pareto", Some(1.0)));
        assert!(matches!(cfg.validate(), Err(Error::InvalidField { field, .. }) if field == "models.q"));
        let mut cfg = ExperimentConfig::gating("out");
        cfg.version = 7;
        assert!(cfg.validate().is_err());
        let text = ExperimentConfig::gating("out").to_json().replace("\"seeds\"", "\"seedz\"");
        assert!(ExperimentConfig::from_json(&text).is_err());
    }

    #[test]
    fn random_atoms_in_box() {
        let nu = AtomSpec::RandomAtoms {
            count: 50,
            dim: 2,
            low: -1.0,
            high: 1.0,
            seed: 4,
        }
        .build()
        .unwrap();
        assert_eq!(nu.len(), 50);
        assert!(nu.atoms().iter().flatten().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn default_rules() {
        let smooth = ModelSpec::with_kind("exponential", Some(0.1));
        let m = smooth.build(10).unwrap();
        assert_eq!(smooth.step_rule(m.as_ref()).unwrap(), StepRule::Smooth { l: 10.0 });
        assert_eq!(ModelSpec::none().step_rule(None).unwrap(), StepRule::Lipschitz);
        assert!(!smooth.inexact());
        assert!(ModelSpec::with_kind("hyperbolic", Some(0.1)).inexact());
    }
}
