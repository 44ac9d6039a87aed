//! The t-distribution model reproduces the Chebyshev ambiguity value.

use smoothot::noise::{chebyshev_value, smooth_value_from_utilities};
use smoothot::{MarginalModel, ModelKind};

fn main() -> smoothot::Result<()> {
    let u = [0.3, -0.1, 0.2, 0.0];
    let lambda = 0.4;
    let m = MarginalModel::with_uniform_eta(ModelKind::TDist, lambda, u.len())?;
    let (value, probs) = smooth_value_from_utilities(&u, &m, 1e-12)?;
    let direct = chebyshev_value(&u, lambda)? - lambda * ((u.len() - 1) as f64).sqrt();
    println!("t-dist transform {value:.8}");
    println!("direct maximum   {direct:.8}");
    println!("probabilities    {:?}", probs.p);
    Ok(())
}
