//! The two-level optimum three ways: closed form, exhaustive grid search and
//! the equal-angle measurement sequence.
//!
//! Run with `cargo run --release --example two_level_oracle`.

use zeno_subspace::channel::{objective, ControlProblem};
use zeno_subspace::optimality::chain_report;
use zeno_subspace::oracle::{equal_angle_sequence, gamma_from_overlap, grid_search_value, optimal_value};
use zeno_subspace::Result;

fn main() -> Result<()> {
    println!("{:>7} {:>2} {:>10} {:>10} {:>10} {:>10}", "overlap", "m", "formula", "grid", "sequence", "chain");
    for overlap in [0.0, 0.5] {
        let gamma = gamma_from_overlap(overlap)?;
        for m in 1..=3 {
            let formula = optimal_value(m, gamma)?;
            let resolution = if m == 3 { 90 } else { 180 };
            let grid = grid_search_value(m, gamma, resolution)?;
            let seq = equal_angle_sequence(m, gamma)?;
            let problem = ControlProblem::with_overlap(2, m, overlap)?;
            let j = objective(&seq, &problem)?;
            let chain = chain_report(&seq, &problem)?.chain_residual;
            println!("{overlap:>7} {m:>2} {formula:>10.6} {grid:>10.6} {j:>10.6} {chain:>10.1e}");
        }
    }
    Ok(())
}
