use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{utilities, CostSpec, DiscreteMeasure, Potential};
use crate::noise::model::{MarginalModel, ModelKind};

/// How a probability vector was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChoiceMethod {
    ClosedForm,
    Sort,
    Bisection,
}

/// Choice probabilities `p ∈ Δᴺ`, i.e. the gradient of the smooth
/// c-transform with respect to the potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceProbabilities {
    pub p: Vec<f64>,
    pub method: ChoiceMethod,
    /// Guaranteed Euclidean distance to the exact gradient (`0` for the
    /// closed-form and sorting oracles).
    pub tolerance: f64,
}

impl ChoiceProbabilities {
    pub fn sum(&self) -> f64 {
        self.p.iter().sum()
    }
}

fn check_lengths(u: &[f64], eta: &[f64]) -> Result<()> {
    if u.len() != eta.len() {
        return Err(Error::LengthMismatch {
            what: "utility vector",
            expected: eta.len(),
            got: u.len(),
        });
    }
    if u.is_empty() {
        return Err(Error::field("u", "at least one utility is required"));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("utilities"));
    }
    Ok(())
}

/// Weighted softmax `p_i ∝ η_i exp(u_i/λ)`.
pub fn softmax_probs(u: &[f64], eta: &[f64], lambda: f64) -> Result<ChoiceProbabilities> {
    check_lengths(u, eta)?;
    if !(lambda > 0.0) {
        return Err(Error::field("lambda", "must be positive"));
    }
    let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = u
        .iter()
        .zip(eta)
        .map(|(&ui, &ei)| ei * ((ui - top) / lambda).exp())
        .collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    Ok(ChoiceProbabilities {
        p,
        method: ChoiceMethod::ClosedForm,
        tolerance: 0.0,
    })
}

/// Threshold `τ⋆` of the weighted sparsemax, so that `p_i = η_i [u_i − τ⋆]₊ / 2`.
pub(crate) fn sparsemax_threshold(u: &[f64], eta: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..u.len()).collect();
    order.sort_by(|&a, &b| u[b].total_cmp(&u[a]).then(a.cmp(&b)));
    let (mut mass, mut weighted) = (0.0, 0.0);
    let (mut best_mass, mut best_weighted) = (eta[order[0]], eta[order[0]] * u[order[0]]);
    for &j in &order {
        mass += eta[j];
        weighted += eta[j] * u[j];
        if 2.0 + mass * u[j] > weighted {
            best_mass = mass;
            best_weighted = weighted;
        }
    }
    (best_weighted - 2.0) / best_mass
}

/// Weighted sparsemax: the maximizer of `Σ u_i p_i − p_i²/η_i` over the simplex.
pub fn sparsemax_probs(u: &[f64], eta: &[f64]) -> Result<ChoiceProbabilities> {
    check_lengths(u, eta)?;
    let tau = sparsemax_threshold(u, eta);
    let p = u
        .iter()
        .zip(eta)
        .map(|(&ui, &ei)| (ei * (ui - tau) / 2.0).clamp(0.0, 1.0))
        .collect();
    Ok(ChoiceProbabilities {
        p,
        method: ChoiceMethod::Sort,
        tolerance: 0.0,
    })
}

/// Marginal choice probabilities `1 − F_i(−u_i − τ)` at a common shift `τ`.
pub(crate) fn shifted_probs(model: &MarginalModel, u: &[f64], tau: f64, out: &mut [f64]) {
    for ((o, &ui), &ei) in out.iter_mut().zip(u).zip(model.eta()) {
        *o = (ei * model.cdf_extended(ui + tau)).clamp(0.0, 1.0);
    }
}

/// Bracket `[τ̲, τ̄]` around the root of `Σ_i 1 − F_i(−u_i − τ) = 1`.
pub(crate) fn root_bracket(model: &MarginalModel, u: &[f64]) -> Result<(f64, f64)> {
    let n = u.len() as f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (i, (&ui, &ei)) in u.iter().zip(model.eta()).enumerate() {
        let level = 1.0 / (n * ei);
        let s = model.generating_quantile(level).map_err(|_| Error::InfiniteQuantile {
            index: i,
            level: 1.0 - 1.0 / n,
        })?;
        let t = s - ui;
        lo = lo.min(t);
        hi = hi.max(t);
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::NonFinite("bisection bracket"));
    }
    Ok((lo, hi))
}

/// Bisection on the common shift `τ`, returning the probabilities at the
/// lower end of the final bracket. The result lies within `ε` of the exact
/// gradient in Euclidean norm.
pub fn bisection_probs(u: &[f64], model: &MarginalModel, eps: f64) -> Result<ChoiceProbabilities> {
    check_lengths(u, model.eta())?;
    if !(eps > 0.0) {
        return Err(Error::field("eps", "bisection tolerance must be positive"));
    }
    if u.len() == 1 {
        return Ok(ChoiceProbabilities {
            p: vec![1.0],
            method: ChoiceMethod::Bisection,
            tolerance: eps,
        });
    }
    let (mut lo, mut hi) = root_bracket(model, u)?;
    let delta = model.tau_resolution(eps);
    let halvings = ((hi - lo) / delta).log2().ceil().max(0.0) as usize;
    let mut p = vec![0.0; u.len()];
    for _ in 0..halvings {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        shifted_probs(model, u, mid, &mut p);
        if p.iter().sum::<f64>() > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    shifted_probs(model, u, lo, &mut p);
    Ok(ChoiceProbabilities {
        p,
        method: ChoiceMethod::Bisection,
        tolerance: eps,
    })
}

/// Dispatches on the model family: softmax for exponential, sparsemax for
/// uniform, bisection otherwise.
pub fn choice_from_utilities(u: &[f64], model: &MarginalModel, eps: f64) -> Result<ChoiceProbabilities> {
    match model.kind() {
        ModelKind::Exponential => softmax_probs(u, model.eta(), model.lambda()),
        ModelKind::Uniform => {
            let scaled: Vec<f64> = u.iter().map(|v| v / model.lambda()).collect();
            sparsemax_probs(&scaled, model.eta())
        }
        _ => bisection_probs(u, model, eps),
    }
}

/// Gradient of the smooth c-transform at `(φ, x)`.
pub fn choice_probabilities(
    phi: &Potential,
    x: &[f64],
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    model: &MarginalModel,
    eps: f64,
) -> Result<ChoiceProbabilities> {
    let u = utilities(phi, x, nu, cost)?;
    choice_from_utilities(&u, model, eps)
}

/// Jacobian `∂p/∂u` of the choice probabilities at `p`, which is also the
/// Hessian of the smooth c-transform: `D − D11ᵀD/(1ᵀD1)` with
/// `D_ii = η_i F′(F⁻¹(p_i/η_i))` on the interior and `0` where `p_i` sits on
/// a bound.
pub fn choice_jacobian(p: &[f64], model: &MarginalModel) -> Result<Vec<Vec<f64>>> {
    check_lengths(p, model.eta())?;
    let d: Vec<f64> = p
        .iter()
        .zip(model.eta())
        .map(|(&pi, &ei)| {
            if pi <= 0.0 || pi >= 1.0 {
                0.0
            } else {
                ei * model.cdf_slope_at_level(pi / ei)
            }
        })
        .collect();
    let total: f64 = d.iter().sum();
    let n = p.len();
    let mut jac = vec![vec![0.0; n]; n];
    for i in 0..n {
        jac[i][i] = d[i];
        if total > 0.0 {
            for j in 0..n {
                jac[i][j] -= d[i] * d[j] / total;
            }
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobian_matches_differences() {
        let u = [0.3, -0.2, 0.05, 0.4];
        let kinds = [
            ModelKind::Exponential,
            ModelKind::Uniform,
            ModelKind::Pareto { q: 1.5 },
            ModelKind::Hyperbolic,
            ModelKind::TDist,
        ];
        for kind in kinds {
            let m = MarginalModel::new(kind, 0.7, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
            let p = choice_from_utilities(&u, &m, 1e-13).unwrap().p;
            let jac = choice_jacobian(&p, &m).unwrap();
            let h = 1e-5;
            for j in 0..4 {
                let (mut a, mut b) = (u, u);
                a[j] += h;
                b[j] -= h;
                let pa = choice_from_utilities(&a, &m, 1e-13).unwrap().p;
                let pb = choice_from_utilities(&b, &m, 1e-13).unwrap().p;
                for i in 0..4 {
                    let fd = (pa[i] - pb[i]) / (2.0 * h);
                    assert!((fd - jac[i][j]).abs() < 1e-4, "{kind:?} ({i},{j}): {fd} vs {}", jac[i][j]);
                }
            }
            for row in &jac {
                assert!(row.iter().sum::<f64>().abs() < 1e-12);
            }
        }
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn softmax_examples() {
        let p = softmax_probs(&[3f64.ln(), 0.0], &[0.5, 0.5], 1.0).unwrap();
        assert!(close(&p.p, &[0.75, 0.25], 1e-15));
        let p = softmax_probs(&[2.0; 4], &[0.25; 4], 0.3).unwrap();
        assert!(close(&p.p, &[0.25; 4], 1e-15));
        let a = softmax_probs(&[1.0, -2.0, 0.5], &[0.2, 0.3, 0.5], 0.7).unwrap();
        let b = softmax_probs(&[11.0, 8.0, 10.5], &[0.2, 0.3, 0.5], 0.7).unwrap();
        assert!(close(&a.p, &b.p, 1e-15));
        let big = softmax_probs(&[1e4, 0.0], &[0.5, 0.5], 1e-3).unwrap();
        assert_eq!(big.p, vec![1.0, 0.0]);
    }

    #[test]
    fn sparsemax_examples() {
        let p = sparsemax_probs(&[1.3; 5], &[0.2; 5]).unwrap();
        assert!(close(&p.p, &[0.2; 5], 1e-15));
        let p = sparsemax_probs(&[4.0, 0.0], &[0.5, 0.5]).unwrap();
        assert!(close(&p.p, &[1.0, 0.0], 1e-15));
        assert!(sparsemax_probs(&[1.0], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn bisection_symmetric() {
        let m = MarginalModel::with_uniform_eta(ModelKind::Hyperbolic, 0.5, 4).unwrap();
        let p = bisection_probs(&[0.3; 4], &m, 1e-9).unwrap();
        assert!(close(&p.p, &[0.25; 4], 1e-9));
        let one = MarginalModel::with_uniform_eta(ModelKind::TDist, 0.5, 1).unwrap();
        assert_eq!(bisection_probs(&[7.0], &one, 1e-3).unwrap().p, vec![1.0]);
        assert!(bisection_probs(&[0.3; 4], &m, 0.0).is_err());
    }

    #[test]
    fn bisection_matches_closed_forms() {
        let u = [0.4, -0.2, 1.1, 0.0, 0.7];
        let eta = [0.1, 0.3, 0.2, 0.15, 0.25];
        let e = MarginalModel::new(ModelKind::Exponential, 0.35, eta.to_vec()).unwrap();
        let exact = softmax_probs(&u, &eta, 0.35).unwrap();
        let approx = bisection_probs(&u, &e, 1e-8).unwrap();
        let err: f64 = exact.p.iter().zip(&approx.p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err <= 1e-8, "{err}");

        let q = MarginalModel::new(ModelKind::Pareto { q: 2.0 }, 1.0, eta.to_vec()).unwrap();
        let exact = sparsemax_probs(&u, &eta).unwrap();
        let approx = bisection_probs(&u, &q, 1e-8).unwrap();
        let err: f64 = exact.p.iter().zip(&approx.p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err <= 1e-8, "{err}");
    }

    #[test]
    fn bisection_never_overshoots() {
        let m = MarginalModel::with_uniform_eta(ModelKind::Pareto { q: 0.5 }, 0.2, 6).unwrap();
        let u = [0.1, 0.9, -0.4, 0.3, 0.3, 2.0];
        let p = bisection_probs(&u, &m, 1e-6).unwrap();
        let s = p.sum();
        assert!((1.0 - 1e-6..=1.0 + 1e-15).contains(&s), "{s}");
    }

    #[test]
    fn tdist_bracket_guard() {
        // 1/(N η_0) = 5/2 lies outside the open range (0, 2) of F
        let m = MarginalModel::new(ModelKind::TDist, 1.0, vec![0.2, 0.8]).unwrap();
        assert!(matches!(
            bisection_probs(&[0.0, 0.0], &m, 1e-6),
            Err(Error::InfiniteQuantile { index: 0, .. })
        ));
    }

    #[test]
    fn uniform_dispatch_folds_lambda() {
        let m = MarginalModel::with_uniform_eta(ModelKind::Uniform, 0.01, 3).unwrap();
        let p = choice_from_utilities(&[1.0, 0.2, 0.1], &m, 1e-6).unwrap();
        assert!(close(&p.p, &[1.0, 0.0, 0.0], 1e-14));
        assert_eq!(p.method, ChoiceMethod::Sort);
    }
}
