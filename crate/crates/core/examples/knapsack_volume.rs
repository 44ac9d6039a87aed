//! Knapsack-polytope volumes recovered by minimizing a two-atom transport
//! distance over the mass split.

use smoothot::hardness::{knapsack_volume_via_ot, KnapsackInstance, QuadratureSpec, VolumeEstimate};

fn main() -> smoothot::Result<()> {
    let quad = QuadratureSpec::Grid { m: 400 };
    println!("{}", VolumeEstimate::CSV_HEADER);
    for (w, b) in [(vec![1.0], 0.3), (vec![1.0, 1.0], 1.0), (vec![2.0, 1.0], 1.0), (vec![1.0, 2.0, 3.0], 2.0)] {
        let inst = KnapsackInstance::new(w, b, 2.0)?;
        let q = if inst.dim() == 3 { QuadratureSpec::Grid { m: 60 } } else { quad };
        println!("{}", knapsack_volume_via_ot(&inst, 1e-3, &q)?.csv_row());
    }
    Ok(())
}
