use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{cost_row, max_with_index, CostSpec, DiscreteMeasure, Point, Potential};
use crate::noise::{smooth_value_from_utilities, MarginalModel, ModelKind};

const CHUNK: usize = 512;

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// The (smooth) semi-discrete dual `h(φ) = νᵀφ − Σ_j w_j ψ̄(φ, x_j)` over a
/// finite set of source points with weights `w`.
///
/// Without a model, `ψ̄` is replaced by the discrete c-transform and the
/// gradient is the one-hot subgradient.
#[derive(Debug, Clone)]
pub struct FiniteDual {
    costs: Vec<f64>,
    weights: Vec<f64>,
    nu: Vec<f64>,
    model: Option<MarginalModel>,
    eps: f64,
}

impl FiniteDual {
    /// `eps` is the bisection tolerance used for models without a closed form.
    pub fn new(
        points: &[Point],
        weights: Option<&[f64]>,
        nu: &DiscreteMeasure,
        cost: &CostSpec,
        model: Option<&MarginalModel>,
        eps: f64,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::field("samples", "at least one source point is required"));
        }
        if let Some(m) = model {
            if m.len() != nu.len() {
                return Err(Error::LengthMismatch {
                    what: "model reference weights",
                    expected: nu.len(),
                    got: m.len(),
                });
            }
        }
        let weights = match weights {
            Some(w) => {
                if w.len() != points.len() {
                    return Err(Error::LengthMismatch {
                        what: "sample weights",
                        expected: points.len(),
                        got: w.len(),
                    });
                }
                w.to_vec()
            }
            None => vec![1.0 / points.len() as f64; points.len()],
        };
        let mut costs = Vec::with_capacity(points.len() * nu.len());
        for x in points {
            costs.extend(cost_row(x, nu, cost)?);
        }
        Ok(Self {
            costs,
            weights,
            nu: nu.weights().to_vec(),
            model: model.cloned(),
            eps,
        })
    }

    pub fn from_measure(
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        cost: &CostSpec,
        model: Option<&MarginalModel>,
        eps: f64,
    ) -> Result<Self> {
        Self::new(mu.atoms(), Some(mu.weights()), nu, cost, model, eps)
    }

    pub fn num_atoms(&self) -> usize {
        self.nu.len()
    }

    pub fn num_points(&self) -> usize {
        self.weights.len()
    }

    pub fn model(&self) -> Option<&MarginalModel> {
        self.model.as_ref()
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn cost_matrix(&self) -> &[f64] {
        &self.costs
    }

    pub fn point_weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ψ̄(φ, x_j)` and its gradient written into `grad`.
    fn row(&self, j: usize, phi: &[f64], u: &mut [f64], grad: &mut [f64]) -> Result<f64> {
        let n = self.nu.len();
        let c = &self.costs[j * n..(j + 1) * n];
        for i in 0..n {
            u[i] = phi[i] - c[i];
        }
        match &self.model {
            None => {
                let (v, k) = max_with_index(u);
                grad.iter_mut().for_each(|g| *g = 0.0);
                grad[k] = 1.0;
                Ok(v)
            }
            Some(m) if m.kind() == ModelKind::Exponential => {
                let lam = m.lambda();
                let top = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let mut total = 0.0;
                for i in 0..n {
                    grad[i] = m.eta()[i] * ((u[i] - top) / lam).exp();
                    total += grad[i];
                }
                grad.iter_mut().for_each(|g| *g /= total);
                Ok(top + lam * total.ln())
            }
            Some(m) => {
                let (v, p) = smooth_value_from_utilities(u, m, self.eps)?;
                grad.copy_from_slice(&p.p);
                Ok(v)
            }
        }
    }

    /// `h(φ)` and `∇h(φ) = ν − Σ_j w_j p(φ, x_j)`.
    ///
    /// Partial sums are formed over fixed-size chunks and combined in index
    /// order, so the result does not depend on the thread count.
    pub fn value_and_grad(&self, phi: &[f64]) -> Result<(f64, Vec<f64>)> {
        let n = self.nu.len();
        if phi.len() != n {
            return Err(Error::LengthMismatch {
                what: "potential",
                expected: n,
                got: phi.len(),
            });
        }
        let m = self.weights.len();
        let partials: Vec<Result<(f64, Vec<f64>)>> = (0..m.div_ceil(CHUNK))
            .into_par_iter()
            .map(|chunk| {
                let mut u = vec![0.0; n];
                let mut g = vec![0.0; n];
                let mut value = 0.0;
                let mut grad = vec![0.0; n];
                for j in chunk * CHUNK..((chunk + 1) * CHUNK).min(m) {
                    let w = self.weights[j];
                    value += w * self.row(j, phi, &mut u, &mut g)?;
                    for i in 0..n {
                        grad[i] += w * g[i];
                    }
                }
                Ok((value, grad))
            })
            .collect();
        let mut psi = 0.0;
        let mut mean_p = vec![0.0; n];
        for part in partials {
            let (v, g) = part?;
            psi += v;
            for i in 0..n {
                mean_p[i] += g[i];
            }
        }
        let linear: f64 = self.nu.iter().zip(phi).map(|(a, b)| a * b).sum();
        let grad = self.nu.iter().zip(&mean_p).map(|(a, b)| a - b).collect();
        let value = linear - psi;
        if !value.is_finite() {
            return Err(Error::NonFinite("dual objective"));
        }
        Ok((value, grad))
    }

    pub fn value(&self, phi: &[f64]) -> Result<f64> {
        Ok(self.value_and_grad(phi)?.0)
    }

    /// Per-point values `νᵀφ − ψ̄(φ, x_j)`, in point order.
    pub fn pointwise_values(&self, phi: &[f64]) -> Result<Vec<f64>> {
        let n = self.nu.len();
        if phi.len() != n {
            return Err(Error::LengthMismatch {
                what: "potential",
                expected: n,
                got: phi.len(),
            });
        }
        let linear: f64 = self.nu.iter().zip(phi).map(|(a, b)| a * b).sum();
        (0..self.weights.len())
            .into_par_iter()
            .map_init(
                || (vec![0.0; n], vec![0.0; n]),
                |(u, g), j| Ok(linear - self.row(j, phi, u, g)?),
            )
            .collect()
    }
}

/// Monte Carlo estimate of the dual objective `E[νᵀφ − ψ̄_c(φ, x)]` (or
/// with the discrete c-transform when `model` is absent) over the given
/// samples, with its standard error.
pub fn dual_objective_estimate(
    phi: &Potential,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    model: Option<&MarginalModel>,
    samples: &[Point],
    eps: f64,
) -> Result<Estimate> {
    phi.check_against(nu)?;
    let dual = FiniteDual::new(samples, None, nu, cost, model, eps)?;
    let values = dual.pointwise_values(phi.values())?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Ok(Estimate {
        mean,
        std_error: (var / n).sqrt(),
    })
}
