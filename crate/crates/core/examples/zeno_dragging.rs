//! More measurements drag the state closer to the target.
//!
//! Run with `cargo run --release --example zeno_dragging`.

use zeno_subspace::channel::ControlProblem;
use zeno_subspace::optimizer::{optimize, OptimizerConfig};
use zeno_subspace::oracle::optimal_value;
use zeno_subspace::Result;

fn main() -> Result<()> {
    let config = OptimizerConfig { restarts: 4, ..OptimizerConfig::default() };
    for m in 1..=8 {
        let j = optimize(&ControlProblem::orthogonal(2, m)?, &config)?.best_objective;
        let oracle = optimal_value(m, std::f64::consts::PI)?;
        println!("m = {m}: J = {j:.10}, two-level optimum {oracle:.10}");
    }
    for m in [16, 32, 64, 128] {
        println!("m = {m}: two-level optimum {:.6}", optimal_value(m, std::f64::consts::PI)?);
    }
    Ok(())
}
