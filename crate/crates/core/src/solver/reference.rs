use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::{draw, CostSpec, DiscreteMeasure, Point, SamplerSpec};
use crate::noise::{MarginalModel, ModelKind};
use crate::solver::agd::nesterov_agd;
use crate::solver::dual::FiniteDual;
use crate::solver::ot::{transport_from_costs, MAX_CELLS};
use crate::solver::sgd::{averaged_sgd_on, SolverConfig};
use crate::solver::step::StepRule;

/// How the reference optimum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceMethod {
    ExactTransport,
    Accelerated,
    LongSgd,
}

/// Settings of [`finite_sample_reference`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    /// The reference uses `multiplier × T` samples.
    pub multiplier: usize,
    /// Iteration cap of the accelerated method.
    pub agd_max_iter: usize,
    /// The long SGD run uses `sgd_factor × T` iterations.
    pub sgd_factor: usize,
    /// Bias budget of the long SGD run.
    pub eps_bar: f64,
    /// Bisection tolerance used when evaluating objectives.
    pub eval_eps: f64,
    /// Cap on `multiplier × T × N`.
    pub max_cells: usize,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            multiplier: 10,
            agd_max_iter: 200_000,
            sgd_factor: 50,
            eps_bar: 0.1,
            eval_eps: 1e-10,
            max_cells: MAX_CELLS,
        }
    }
}

/// High-accuracy optimum of the finite-sample problem.
#[derive(Debug, Clone)]
pub struct Reference {
    pub value: f64,
    /// Reference maximizer in the mean-zero gauge (minimum norm for the
    /// unregularized problem).
    pub potential: Vec<f64>,
    pub method: ReferenceMethod,
    /// Gradient norm at the returned potential (smooth models only).
    pub residual: Option<f64>,
    /// The finite-sample dual the reference optimizes.
    pub dual: FiniteDual,
    pub samples: Vec<Point>,
}

/// Solves the transport problem between `ν` and the uniform measure on the
/// first `multiplier × T` draws of `sampler`.
///
/// The unregularized problem is solved exactly; entropic and χ² problems by
/// the accelerated method; other models by averaged SGD with `sgd_factor × T`
/// iterations resampling the same points.
pub fn finite_sample_reference(
    sampler: &SamplerSpec,
    nu: &DiscreteMeasure,
    cost: &CostSpec,
    model: Option<&MarginalModel>,
    horizon: usize,
    cfg: &ReferenceConfig,
) -> Result<Reference> {
    let count = cfg.multiplier.max(1).saturating_mul(horizon.max(1));
    if count.saturating_mul(nu.len()) > cfg.max_cells {
        return Err(Error::TooLarge(format!(
            "reference with {count} samples and {} atoms exceeds {} cells",
            nu.len(),
            cfg.max_cells
        )));
    }
    if sampler.dim() != nu.dim() {
        return Err(Error::DimensionMismatch {
            expected: nu.dim(),
            got: sampler.dim(),
        });
    }
    let samples = draw(sampler, count)?;
    let dual = FiniteDual::new(&samples, None, nu, cost, model, cfg.eval_eps)?;
    let (potential, method, residual) = match model.map(|m| m.kind()) {
        None => {
            let sol = transport_from_costs(dual.cost_matrix(), dual.point_weights(), nu.weights())?;
            (sol.potential, ReferenceMethod::ExactTransport, None)
        }
        Some(ModelKind::Exponential | ModelKind::Uniform) => {
            let r = nesterov_agd(&dual, cfg.agd_max_iter)?;
            (r.phi, ReferenceMethod::Accelerated, Some(r.grad_norm))
        }
        Some(_) => {
            let m = model.expect("model present");
            let mut sgd = SolverConfig::new(
                cfg.sgd_factor.max(1) * horizon.max(1),
                StepRule::smooth_for(m)?,
                sampler.seed(),
            );
            sgd.eps_bar = cfg.eps_bar;
            let mut rng = ChaCha12Rng::seed_from_u64(sampler.seed() ^ 0x5eed_5eed_5eed_5eed);
            let stream = std::iter::from_fn(|| Some(samples[rng.random_range(0..samples.len())].clone()));
            let (_, upper, _) = averaged_sgd_on(stream, nu, cost, Some(m), &sgd)?;
            let mut phi = upper.into_inner();
            let mean = phi.iter().sum::<f64>() / phi.len() as f64;
            phi.iter_mut().for_each(|v| *v -= mean);
            let g = dual.value_and_grad(&phi)?.1;
            (phi, ReferenceMethod::LongSgd, Some(g.iter().map(|v| v * v).sum::<f64>().sqrt()))
        }
    };
    let value = dual.value(&potential)?;
    Ok(Reference {
        value,
        potential,
        method,
        residual,
        dual,
        samples,
    })
}

/// Squared distance between two potentials after removing their means.
pub fn gauge_gap(a: &[f64], b: &[f64]) -> f64 {
    let ma = a.iter().sum::<f64>() / a.len() as f64;
    let mb = b.iter().sum::<f64>() / b.len() as f64;
    a.iter().zip(b).map(|(x, y)| ((x - ma) - (y - mb)).powi(2)).sum()
}

/// Smallest eigenvalue of `−∇²h` on the mean-zero subspace, from central
/// differences of the gradient.
pub fn estimate_kappa(dual: &FiniteDual, phi: &[f64]) -> Result<f64> {
    let n = phi.len();
    if n < 2 {
        return Ok(0.0);
    }
    let h = 1e-5;
    let mut hess = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut a = phi.to_vec();
        let mut b = phi.to_vec();
        a[j] += h;
        b[j] -= h;
        let (ga, gb) = (dual.value_and_grad(&a)?.1, dual.value_and_grad(&b)?.1);
        for i in 0..n {
            hess[i][j] = -(ga[i] - gb[i]) / (2.0 * h);
        }
    }
    // symmetrize and lift the constant direction out of the way
    let lift = hess.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max) * n as f64;
    let mut a = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            a[i][j] = 0.5 * (hess[i][j] + hess[j][i]) + lift / n as f64;
        }
    }
    Ok(symmetric_eigenvalues(a).into_iter().fold(f64::INFINITY, f64::min))
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::ot::exact_discrete_ot;

    fn setup() -> (SamplerSpec, DiscreteMeasure, CostSpec) {
        (
            SamplerSpec::GaussianStandard { dim: 2, seed: 5 },
            DiscreteMeasure::uniform(vec![vec![0.5, 0.5], vec![-0.5, 0.0], vec![0.2, -0.7]]).unwrap(),
            CostSpec::SupNorm,
        )
    }

    #[test]
    fn unregularized_matches_exact_transport() {
        let (sampler, nu, cost) = setup();
        let r = finite_sample_reference(&sampler, &nu, &cost, None, 20, &ReferenceConfig::default()).unwrap();
        let mu = DiscreteMeasure::uniform(r.samples.clone()).unwrap();
        let exact = exact_discrete_ot(&mu, &nu, &cost).unwrap();
        assert!((r.value - exact.plan.value).abs() < 1e-12, "{} vs {}", r.value, exact.plan.value);
        assert_eq!(r.samples.len(), 200);
    }

    #[test]
    fn entropic_within_bound() {
        let (sampler, nu, cost) = setup();
        let m = MarginalModel::with_uniform_eta(ModelKind::Exponential, 0.5, 3).unwrap();
        let cfg = ReferenceConfig::default();
        let plain = finite_sample_reference(&sampler, &nu, &cost, None, 10, &cfg).unwrap();
        let smooth = finite_sample_reference(&sampler, &nu, &cost, Some(&m), 10, &cfg).unwrap();
        assert!(smooth.value >= plain.value - 1e-9);
        assert!(smooth.value <= plain.value + 0.5 * 3f64.ln() + 1e-9);
        assert!(smooth.residual.unwrap() <= 1e-7);
    }

    #[test]
    fn memory_guard() {
        let (sampler, nu, cost) = setup();
        let cfg = ReferenceConfig {
            max_cells: 100,
            ..ReferenceConfig::default()
        };
        assert!(matches!(
            finite_sample_reference(&sampler, &nu, &cost, None, 10, &cfg),
            Err(Error::TooLarge(_))
        ));
    }

    #[test]
    fn kappa_of_softmax_dual() {
        // single point: −∇²h = (diag p − ppᵀ)/λ; at p uniform over 2 atoms its
        // nonzero eigenvalue is 1/(2λ)
        let mu = DiscreteMeasure::uniform(vec![vec![0.0]]).unwrap();
        let nu = DiscreteMeasure::uniform(vec![vec![-1.0], vec![1.0]]).unwrap();
        let m = MarginalModel::with_uniform_eta(ModelKind::Exponential, 0.25, 2).unwrap();
        let dual = FiniteDual::from_measure(&mu, &nu, &CostSpec::SupNorm, Some(&m), 0.0).unwrap();
        let k = estimate_kappa(&dual, &[0.0, 0.0]).unwrap();
        assert!((k - 2.0).abs() < 1e-5, "{k}");
    }

    #[test]
    fn gauge() {
        assert!(gauge_gap(&[1.0, 2.0], &[3.0, 4.0]).abs() < 1e-15);
        assert!((gauge_gap(&[1.0, -1.0], &[0.0, 0.0]) - 2.0).abs() < 1e-15);
    }
}
