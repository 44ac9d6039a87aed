//! High-accuracy optimum of the finite-sample problem for three models.

use smoothot::solver::{estimate_kappa, finite_sample_reference, ReferenceConfig};
use smoothot::{CostSpec, DiscreteMeasure, MarginalModel, ModelKind, SamplerSpec};

fn main() -> smoothot::Result<()> {
    let nu = DiscreteMeasure::uniform(vec![vec![-0.6, 0.2], vec![0.4, -0.5], vec![0.3, 0.8], vec![-0.2, -0.9]])?;
    let sampler = SamplerSpec::GaussianStandard { dim: 2, seed: 11 };
    let cfg = ReferenceConfig::default();
    let models = [
        None,
        Some(MarginalModel::with_uniform_eta(ModelKind::Exponential, 0.1, 4)?),
        Some(MarginalModel::with_uniform_eta(ModelKind::Uniform, 0.1, 4)?),
    ];
    for m in &models {
        let r = finite_sample_reference(&sampler, &nu, &CostSpec::SupNorm, m.as_ref(), 500, &cfg)?;
        let tag = m.as_ref().map_or("none", |m| m.kind().tag());
        print!("{tag:<12} value {:.6} via {:?}", r.value, r.method);
        if m.is_some() {
            print!(", curvature {:.4}", estimate_kappa(&r.dual, &r.potential)?);
        }
        println!();
    }
    Ok(())
}
