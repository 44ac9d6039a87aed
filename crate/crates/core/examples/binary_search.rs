//! Binary search for the minimizer of a convex function on [0, 1] with a
//! fixed oracle budget.

use smoothot::hardness::binary_search_min;

fn main() -> smoothot::Result<()> {
    for delta in [1e-1, 1e-2, 1e-3, 1e-6] {
        let r = binary_search_min(|t| Ok((t - 0.3141).powi(2)), delta)?;
        println!("δ = {delta:e}: t̂ = {:.7}, {} oracle calls", r.t, r.calls);
    }
    Ok(())
}
