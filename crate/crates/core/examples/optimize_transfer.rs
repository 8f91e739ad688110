//! Multi-restart optimization of |1⟩ → |2⟩ in a four-level system.
//!
//! Run with `cargo run --release --example optimize_transfer`.

use zeno_subspace::channel::ControlProblem;
use zeno_subspace::optimizer::{optimize, OptimizerConfig};
use zeno_subspace::oracle::optimal_value;
use zeno_subspace::Result;

fn main() -> Result<()> {
    let problem = ControlProblem::orthogonal(4, 3)?;
    let config = OptimizerConfig { restarts: 8, base_seed: 7, ..OptimizerConfig::default() };
    let result = optimize(&problem, &config)?;

    for r in &result.per_restart {
        println!(
            "seed {:>2}: J = {:.12} after {:>4} iterations, |X| = {:.1e}{}",
            r.seed,
            r.objective,
            r.iterations,
            r.final_grad_norm,
            if r.converged { "" } else { " (not converged)" }
        );
    }
    let oracle = optimal_value(3, std::f64::consts::PI)?;
    println!("best {:.12}, two-level optimum {oracle:.12}", result.best_objective);
    println!("leakage of the optimal bases: {:?}", result.leakage);
    Ok(())
}
