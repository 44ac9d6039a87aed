//! Averaged SGD on the entropic semi-discrete dual and a Monte Carlo check of
//! the objective at the averaged potential.

use smoothot::measure::draw;
use smoothot::solver::{averaged_sgd, dual_objective_estimate, SolverConfig, StepRule};
use smoothot::{CostSpec, DiscreteMeasure, MarginalModel, ModelKind, SamplerSpec};

fn main() -> smoothot::Result<()> {
    let nu = DiscreteMeasure::uniform(vec![vec![-0.5, -0.5], vec![0.5, 0.0], vec![0.0, 0.7]])?;
    let sampler = SamplerSpec::GaussianStandard { dim: 2, seed: 7 };
    let cost = CostSpec::PNormPower { p: 2.0 };
    let model = MarginalModel::with_uniform_eta(ModelKind::Exponential, 0.1, 3)?;

    let cfg = SolverConfig::new(20_000, StepRule::smooth_for(&model)?, 7);
    let (_, upper, trace) = averaged_sgd(&sampler, &nu, &cost, Some(&model), &cfg)?;
    println!("step {:.5}, {} samples", trace.step, trace.samples);
    println!("averaged potential {:?}", upper.values());

    let holdout = draw(&SamplerSpec::GaussianStandard { dim: 2, seed: 99 }, 50_000)?;
    let est = dual_objective_estimate(&upper, &nu, &cost, Some(&model), &holdout, 1e-10)?;
    println!("dual objective {:.5} ± {:.5}", est.mean, est.std_error);
    print!("{}", trace.to_csv(None, false)?);
    Ok(())
}
