use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::MarginalModel;

/// Gradient bound `R` of the stochastic dual gradient `ν − p`.
pub const GRADIENT_BOUND: f64 = 2.0;

/// Constant step-size rule of the averaged SGD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum StepRule {
    /// `γ = 1/(2(2 + ε̄)√T)`, evaluated at the lower average.
    Lipschitz,
    /// `γ = 1/(2(R + ε̄)²√T)` with `R = 2`, evaluated at the lower average.
    LipschitzSquared,
    /// `γ = 1/(2√T + L)`, evaluated at the upper average.
    Smooth { l: f64 },
    /// `γ = 1/(2G²√T)` with `G = max{M, 2 + ε̄}`, evaluated at the lower average.
    SelfConcordant { m: f64 },
}

/// Which running average a rule's guarantee applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Average {
    /// `(1/T) Σ_{t=1}^T φ_{t−1}`
    Lower,
    /// `(1/T) Σ_{t=1}^T φ_t`
    Upper,
}

impl StepRule {
    pub fn average(&self) -> Average {
        match self {
            StepRule::Smooth { .. } => Average::Upper,
            _ => Average::Lower,
        }
    }

    /// Smooth rule with the model's Lipschitz constant.
    pub fn smooth_for(model: &MarginalModel) -> Result<Self> {
        let l = model
            .lipschitz_constant()
            .ok_or_else(|| Error::field("rule", format!("the {} model has no Lipschitz constant", model.kind().tag())))?;
        Ok(StepRule::Smooth { l })
    }

    /// Self-concordant rule with the model's constant `M`.
    pub fn self_concordant_for(model: &MarginalModel) -> Result<Self> {
        let m = model.self_concordance_constant().ok_or_else(|| {
            Error::field("rule", format!("the {} model has no self-concordance constant", model.kind().tag()))
        })?;
        Ok(StepRule::SelfConcordant { m })
    }
}

/// Constants entering the convergence guarantees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub r: f64,
    pub l: Option<f64>,
    pub m: Option<f64>,
    pub g: f64,
    /// Smallest eigenvalue of the negative dual Hessian at the optimum, when estimated.
    pub kappa: Option<f64>,
}

impl RateConstants {
    pub fn for_model(model: Option<&MarginalModel>, eps_bar: f64) -> Self {
        let l = model.and_then(|m| m.lipschitz_constant());
        let m = model.and_then(|m| m.self_concordance_constant());
        Self {
            r: GRADIENT_BOUND,
            l,
            m,
            g: m.unwrap_or(0.0).max(GRADIENT_BOUND + eps_bar),
            kappa: None,
        }
    }
}

/// The constant step size of a rule for horizon `T` and bias budget `ε̄`.
pub fn step_size(rule: &StepRule, horizon: usize, eps_bar: f64) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::field("T", "horizon must be at least 1"));
    }
    if !(eps_bar >= 0.0 && eps_bar.is_finite()) {
        return Err(Error::field("eps_bar", format!("{eps_bar} must be nonnegative and finite")));
    }
    let root = (horizon as f64).sqrt();
    match *rule {
        StepRule::Lipschitz => Ok(1.0 / (2.0 * (GRADIENT_BOUND + eps_bar) * root)),
        StepRule::LipschitzSquared => Ok(1.0 / (2.0 * (GRADIENT_BOUND + eps_bar).powi(2) * root)),
        StepRule::Smooth { l } => {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::field("l", "smoothness constant must be positive and finite"));
            }
            Ok(1.0 / (2.0 * root + l))
        }
        StepRule::SelfConcordant { m } => {
            if !(m >= 0.0 && m.is_finite()) {
                return Err(Error::field("m", "self-concordance constant must be nonnegative and finite"));
            }
            let g = m.max(GRADIENT_BOUND + eps_bar);
            Ok(1.0 / (2.0 * g * g * root))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_examples() {
        assert!((step_size(&StepRule::Lipschitz, 10_000, 0.0).unwrap() - 2.5e-3).abs() < 1e-18);
        assert!((step_size(&StepRule::Smooth { l: 5.0 }, 10_000, 0.0).unwrap() - 1.0 / 205.0).abs() < 1e-18);
        assert!((step_size(&StepRule::SelfConcordant { m: 2.0 }, 100, 0.0).unwrap() - 1.0 / 80.0).abs() < 1e-18);
        assert!((step_size(&StepRule::LipschitzSquared, 100, 0.0).unwrap() - 1.0 / 80.0).abs() < 1e-18);
    }

    #[test]
    fn missing_constants() {
        assert!(step_size(&StepRule::Smooth { l: 0.0 }, 10, 0.0).is_err());
        assert!(step_size(&StepRule::Smooth { l: f64::NAN }, 10, 0.0).is_err());
        assert!(step_size(&StepRule::Lipschitz, 0, 0.0).is_err());
        assert!(step_size(&StepRule::Lipschitz, 10, -1.0).is_err());
        let m = MarginalModel::with_uniform_eta(crate::ModelKind::Pareto { q: 3.0 }, 1.0, 3).unwrap();
        assert!(StepRule::smooth_for(&m).is_err());
        assert!(StepRule::self_concordant_for(&m).is_err());
    }

    #[test]
    fn g_dominates() {
        let m = MarginalModel::with_uniform_eta(crate::ModelKind::Exponential, 0.1, 3).unwrap();
        let k = RateConstants::for_model(Some(&m), 0.5);
        assert_eq!(k.g, 10.0);
        let k = RateConstants::for_model(None, 0.5);
        assert_eq!(k.g, 2.5);
        assert!(k.g >= k.r + 0.5);
    }

    #[test]
    fn json_shape() {
        let s = serde_json::to_string(&StepRule::Smooth { l: 2.0 }).unwrap();
        assert_eq!(s, r#"{"rule":"smooth","l":2.0}"#);
    }
}
