//! The smooth c-transform sits below the hard c-transform by at most the
//! model's approximation bound.

use smoothot::measure::discrete_c_transform;
use smoothot::noise::smooth_c_transform;
use smoothot::{CostSpec, DiscreteMeasure, MarginalModel, ModelKind, Potential};

fn main() -> smoothot::Result<()> {
    let nu = DiscreteMeasure::uniform(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]])?;
    let phi = Potential::new(vec![0.1, -0.2, 0.05])?;
    let x = [0.4, 0.3];
    let cost = CostSpec::PNormPower { p: 2.0 };
    let (hard, winner) = discrete_c_transform(&phi, &x, &nu, &cost)?;
    println!("hard c-transform {hard:.6} (atom {winner})");
    for kind in [
        ModelKind::Exponential,
        ModelKind::Uniform,
        ModelKind::Pareto { q: 2.0 },
        ModelKind::Hyperbolic,
        ModelKind::TDist,
    ] {
        let m = MarginalModel::with_uniform_eta(kind, 0.1, 3)?;
        let smooth = smooth_c_transform(&phi, &x, &nu, &cost, &m, 1e-10)?;
        println!(
            "{:<12} smooth {smooth:.6}  gap {:.2e}  bound {:.4}",
            kind.tag(),
            hard - smooth,
            m.approximation_bound()
        );
    }
    Ok(())
}
