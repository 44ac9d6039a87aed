use crate::error::{Error, Result};
use crate::measure::{utilities, CostSpec, DiscreteMeasure, Potential};
use crate::noise::choice::{choice_from_utilities, sparsemax_probs, ChoiceProbabilities};
use crate::noise::model::{MarginalModel, ModelKind};

/// `λ log Σ_i η_i exp(u_i/λ)`, computed with a max shift.
pub fn log_partition(u: &[f64], eta: &[f64], lambda: f64) -> f64 {
    let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = u
        .iter()
        .zip(eta)
        .map(|(&ui, &ei)| ei * ((ui - top) / lambda).exp())
        .sum();
    top + lambda * s.ln()
}

/// Weighted sparse maximum `max_{p ∈ Δ} Σ u_i p_i − p_i²/η_i`.
pub fn spmax(u: &[f64], eta: &[f64]) -> Result<f64> {
    let p = sparsemax_probs(u, eta)?.p;
    Ok(u.iter()
        .zip(&p)
        .zip(eta)
        .map(|((&ui, &pi), &ei)| ui * pi - pi * pi / ei)
        .sum())
}

/// Smooth c-transform value and its gradient from the utilities
/// `u_i = φ_i − c(x, y_i)`.
pub fn smooth_value_from_utilities(
    u: &[f64],
    model: &MarginalModel,
    eps: f64,
) -> Result<(f64, ChoiceProbabilities)> {
    let probs = choice_from_utilities(u, model, eps)?;
    let lam = model.lambda();
    let value = match model.kind() {
        ModelKind::Exponential => log_partition(u, model.eta(), lam),
        ModelKind::Uniform => {
            let scaled: Vec<f64> = u.iter().map(|v| v / lam).collect();
            lam + lam * spmax(&scaled, model.eta())?
        }
        _ => {
            let total = probs.sum();
            if !(total > 0.0) {
                return Err(Error::NonFinite("choice probabilities"));
            }
            let n = u.len() as f64;
            let p: Vec<f64> = probs
                .p
                .iter()
                .zip(model.eta())
                .map(|(&pi, &ei)| {
                    let pi = pi / total;
                    if model.kind() == ModelKind::TDist {
                        pi.min(n * ei)
                    } else {
                        pi
                    }
                })
                .collect();
            let linear: f64 = u.iter().zip(&p).map(|(a, b)| a * b).sum();
            linear - model.discrete_f_divergence(&p)?
        }
    };
    Ok((value, probs))
}

/// Smooth c-transform `ψ̄_c(φ, x) = max_{p∈Δ} Σ (φ_i − c(x,y_i)) p_i − D_f(p‖η)`.
pub fn smooth_c_transform(
    phi: &Potential,
    x: &[f64],
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    model: &MarginalModel,
    eps: f64,
) -> Result<f64> {
    let u = utilities(phi, x, nu, cost)?;
    Ok(smooth_value_from_utilities(&u, model, eps)?.0)
}

/// `max_{p∈Δ} Σ u_i p_i + λ Σ √(p_i(1 − p_i))`, by an interior Newton
/// method on the simplex started from the barycenter.
pub fn chebyshev_value(u: &[f64], lambda: f64) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::field("u", "at least one utility is required"));
    }
    if !(lambda > 0.0) {
        return Err(Error::field("lambda", "must be positive"));
    }
    if u.len() == 1 {
        return Ok(u[0]);
    }
    let n = u.len();
    let objective = |p: &[f64]| -> f64 {
        u.iter()
            .zip(p)
            .map(|(&ui, &pi)| ui * pi + lambda * (pi * (1.0 - pi)).sqrt())
            .sum()
    };
    let mut p = vec![1.0 / n as f64; n];
    let mut value = objective(&p);
    let mut grad = vec![0.0; n];
    let mut curv = vec![0.0; n];
    let mut dir = vec![0.0; n];
    let mut trial = vec![0.0; n];
    for _ in 0..500 {
        for i in 0..n {
            let v = p[i] * (1.0 - p[i]);
            let r = v.sqrt();
            grad[i] = u[i] + lambda * (1.0 - 2.0 * p[i]) / (2.0 * r);
            curv[i] = lambda / (4.0 * v * r);
        }
        let inv: f64 = curv.iter().map(|c| 1.0 / c).sum();
        let mult = grad.iter().zip(&curv).map(|(g, c)| g / c).sum::<f64>() / inv;
        let mut decrement = 0.0;
        for i in 0..n {
            dir[i] = (grad[i] - mult) / curv[i];
            decrement += (grad[i] - mult) * dir[i];
        }
        if decrement < 1e-24 {
            break;
        }
        let mut step: f64 = 1.0;
        for i in 0..n {
            if dir[i] < 0.0 {
                step = step.min(-0.99 * p[i] / dir[i]);
            } else if dir[i] > 0.0 {
                step = step.min(0.99 * (1.0 - p[i]) / dir[i]);
            }
        }
        let mut accepted = false;
        while step > 1e-20 {
            for i in 0..n {
                trial[i] = p[i] + step * dir[i];
            }
            let candidate = objective(&trial);
            if candidate >= value + 0.25 * step * decrement {
                p.copy_from_slice(&trial);
                value = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    Ok(value)
}
