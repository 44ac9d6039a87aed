//! Choice probabilities under each marginal model for one utility vector.

use smoothot::noise::{bisection_probs, choice_from_utilities, softmax_probs, sparsemax_probs};
use smoothot::{MarginalModel, ModelKind};

fn main() -> smoothot::Result<()> {
    let u = [0.4, 0.1, -0.3, 0.25];
    let eta = [0.25; 4];

    println!("softmax   {:?}", softmax_probs(&u, &eta, 0.2)?.p);
    println!("sparsemax {:?}", sparsemax_probs(&u, &eta)?.p);

    let exp = MarginalModel::with_uniform_eta(ModelKind::Exponential, 0.2, 4)?;
    println!("bisection {:?}", bisection_probs(&u, &exp, 1e-10)?.p);

    for kind in [ModelKind::Pareto { q: 1.5 }, ModelKind::Hyperbolic, ModelKind::TDist] {
        let m = MarginalModel::with_uniform_eta(kind, 0.2, 4)?;
        let p = choice_from_utilities(&u, &m, 1e-10)?;
        println!("{:<10}{:?} ({:?})", kind.tag(), p.p, p.method);
    }
    Ok(())
}
