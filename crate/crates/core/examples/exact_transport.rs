//! Exact discrete transport between an empirical sample and a few atoms.

use smoothot::measure::draw;
use smoothot::solver::exact_discrete_ot;
use smoothot::{CostSpec, DiscreteMeasure, SamplerSpec};

fn main() -> smoothot::Result<()> {
    let mu = DiscreteMeasure::uniform(draw(&SamplerSpec::GaussianStandard { dim: 2, seed: 3 }, 2_000)?)?;
    let nu = DiscreteMeasure::new(vec![vec![-1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.5]], vec![0.5, 0.3, 0.2])?;
    let sol = exact_discrete_ot(&mu, &nu, &CostSpec::SupNorm)?;
    println!("transport cost {:.6}", sol.plan.value);
    println!("column sums {:?}", sol.plan.col_sums());
    println!("min-norm potential {:?}", sol.potential);
    Ok(())
}
