//! Optimizing over all of U(N) buys nothing over a qubit living in the span
//! of the initial and target states.
//!
//! Run with `cargo run --release --example effective_subspace`.

use zeno_subspace::channel::ControlProblem;
use zeno_subspace::optimizer::{compare_restricted, OptimizerConfig};
use zeno_subspace::Result;

fn main() -> Result<()> {
    let config = OptimizerConfig { restarts: 8, ..OptimizerConfig::default() };
    println!("{:>2} {:>2} {:>14} {:>14} {:>14} {:>10}", "n", "m", "U(N)", "U(2)+U(N-2)", "U(2)+I", "gap");
    for n in [2, 3, 4, 6] {
        for m in 1..=3 {
            let c = compare_restricted(&ControlProblem::orthogonal(n, m)?, &config)?;
            println!(
                "{n:>2} {m:>2} {:>14.10} {:>14.10} {:>14.10} {:>10.1e}",
                c.j_full, c.j_block, c.j_embedded, c.gap_full_vs_embedded
            );
        }
    }
    Ok(())
}
