//! Divergence generators and the upper-tail quantile integral.

use smoothot::{MarginalModel, ModelKind};

fn main() -> smoothot::Result<()> {
    let p = [0.5, 0.3, 0.2];
    for kind in [ModelKind::Exponential, ModelKind::Uniform, ModelKind::Pareto { q: 3.0 }] {
        let m = MarginalModel::with_uniform_eta(kind, 0.5, 3)?;
        println!("{:<12} D_f(p‖η) = {:.6}", kind.tag(), m.discrete_f_divergence(&p)?);
    }

    // ∫_{1−p}^1 F_i⁻¹(t) dt equals −η_i f(p/η_i)
    let m = MarginalModel::with_uniform_eta(ModelKind::Hyperbolic, 0.5, 3)?;
    let level = 0.2;
    let n = 200_000;
    let h = level / n as f64;
    let mut quad = 0.0;
    for k in 0..n {
        quad += m.marginal_quantile(0, 1.0 - level + (k as f64 + 0.5) * h)? * h;
    }
    println!("quadrature {quad:.8}  closed form {:.8}", m.upper_tail_integral(0, level)?);
    Ok(())
}
