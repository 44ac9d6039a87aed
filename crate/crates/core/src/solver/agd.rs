use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise::ModelKind;
use crate::solver::dual::FiniteDual;

/// Stationarity threshold on `‖∇h‖`.
pub const AGD_GRADIENT_TOL: f64 = 1e-7;

/// Output of [`nesterov_agd`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgdResult {
    /// Maximizer estimate, in the mean-zero gauge.
    pub phi: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub restarts: usize,
}

/// Smoothness constant of the finite-sample dual.
pub fn dual_smoothness(dual: &FiniteDual) -> Result<f64> {
    let m = dual
        .model()
        .ok_or_else(|| Error::field("model", "accelerated gradient needs a smooth model"))?;
    match m.kind() {
        ModelKind::Exponential => Ok(1.0 / m.lambda()),
        ModelKind::Uniform => Ok(m.eta().iter().copied().fold(0.0, f64::max) / (2.0 * m.lambda())),
        other => Err(Error::field(
            "model",
            format!("accelerated gradient needs exact gradients; the {} model uses bisection", other.tag()),
        )),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Nesterov's accelerated gradient ascent with step `1/L` and
/// gradient-based adaptive restart on the finite-sample smooth dual. Stops
/// once `‖∇h‖ ≤ 1e−7` or after `max_iter` gradient evaluations.
pub fn nesterov_agd(dual: &FiniteDual, max_iter: usize) -> Result<AgdResult> {
    let lip = dual_smoothness(dual)?;
    let n = dual.num_atoms();
    let step = 1.0 / lip;
    let mut x = vec![0.0; n];
    let mut y = x.clone();
    let mut momentum_age = 0usize;
    let mut restarts = 0;
    let mut best = (f64::NEG_INFINITY, x.clone(), f64::INFINITY);
    for k in 0..max_iter.max(1) {
        let (value, grad) = dual.value_and_grad(&y)?;
        let gnorm = norm(&grad);
        if value > best.0 || gnorm <= AGD_GRADIENT_TOL {
            best = (value, y.clone(), gnorm);
        }
        if gnorm <= AGD_GRADIENT_TOL {
            let mut phi = y;
            center(&mut phi);
            return Ok(AgdResult {
                phi,
                value,
                grad_norm: gnorm,
                iterations: k + 1,
                restarts,
            });
        }
        let next: Vec<f64> = y.iter().zip(&grad).map(|(a, g)| a + step * g).collect();
        let progress: f64 = grad.iter().zip(next.iter().zip(&x)).map(|(g, (a, b))| g * (a - b)).sum();
        if progress < 0.0 {
            momentum_age = 0;
            restarts += 1;
        }
        momentum_age += 1;
        let beta = (momentum_age as f64 - 1.0) / (momentum_age as f64 + 2.0);
        y = next.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
        x = next;
    }
    let (value, mut phi, grad_norm) = best;
    center(&mut phi);
    Ok(AgdResult {
        phi,
        value,
        grad_norm,
        iterations: max_iter.max(1),
        restarts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{CostSpec, DiscreteMeasure};
    use crate::noise::MarginalModel;

    #[test]
    fn symmetric_two_by_two() {
        let mu = DiscreteMeasure::uniform(vec![vec![0.0], vec![1.0]]).unwrap();
        let nu = DiscreteMeasure::uniform(vec![vec![0.2], vec![0.8]]).unwrap();
        for kind in [ModelKind::Exponential, ModelKind::Uniform] {
            let m = MarginalModel::with_uniform_eta(kind, 0.3, 2).unwrap();
            let dual = FiniteDual::from_measure(&mu, &nu, &CostSpec::PNormPower { p: 2.0 }, Some(&m), 0.0).unwrap();
            let r = nesterov_agd(&dual, 10_000).unwrap();
            assert!(r.grad_norm <= AGD_GRADIENT_TOL);
            assert!(r.phi[0].abs() < 1e-7 && r.phi[1].abs() < 1e-7, "{:?}", r.phi);
        }
    }

    #[test]
    fn stationary_output() {
        let mu = DiscreteMeasure::new(vec![vec![0.0, 0.1], vec![0.7, 0.2], vec![-0.4, 0.9]], vec![0.5, 0.3, 0.2])
            .unwrap();
        let nu = DiscreteMeasure::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]], vec![0.6, 0.4]).unwrap();
        let m = MarginalModel::with_uniform_eta(ModelKind::Exponential, 0.05, 2).unwrap();
        let dual = FiniteDual::from_measure(&mu, &nu, &CostSpec::SupNorm, Some(&m), 0.0).unwrap();
        let r = nesterov_agd(&dual, 100_000).unwrap();
        let (_, g) = dual.value_and_grad(&r.phi).unwrap();
        assert!(norm(&g) <= 1e-7);
        assert!(r.phi.iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn rejects_inexact_models() {
        let mu = DiscreteMeasure::uniform(vec![vec![0.0]]).unwrap();
        let nu = DiscreteMeasure::uniform(vec![vec![0.2], vec![0.8]]).unwrap();
        let m = MarginalModel::with_uniform_eta(ModelKind::Hyperbolic, 0.3, 2).unwrap();
        let dual = FiniteDual::from_measure(&mu, &nu, &CostSpec::SupNorm, Some(&m), 1e-9).unwrap();
        assert!(nesterov_agd(&dual, 10).is_err());
        let plain = FiniteDual::from_measure(&mu, &nu, &CostSpec::SupNorm, None, 0.0).unwrap();
        assert!(nesterov_agd(&plain, 10).is_err());
    }
}
