//! Transfer to a target that already overlaps the initial state.
//!
//! Run with `cargo run --release --example non_orthogonal`.

use zeno_subspace::channel::ControlProblem;
use zeno_subspace::experiments::{sweep, SweepSpec};
use zeno_subspace::optimality::offblock_coupling;
use zeno_subspace::optimizer::{optimize, OptimizerConfig};
use zeno_subspace::Result;

fn main() -> Result<()> {
    let config = OptimizerConfig { restarts: 8, ..OptimizerConfig::default() };
    let spec = SweepSpec { ns: vec![2, 4], ms: vec![1, 2, 3], overlap: 0.5, config: config.clone(), timing: true };
    for row in sweep(&spec)? {
        println!(
            "n={} m={}: J = {:.10}, oracle {:.10}, gap {:+.1e}, {:.2}s",
            row.n,
            row.m,
            row.j_best,
            row.j_oracle,
            row.gap,
            row.seconds.unwrap_or_default()
        );
    }

    // At the optimum the initial state's commutator has no component
    // coupling the effective subspace to the rest.
    let problem = ControlProblem::with_overlap(4, 2, 0.5)?;
    let best = optimize(&problem, &config)?.best_sequence;
    println!("off-block coupling at the optimum: {:.1e}", offblock_coupling(&best, &problem)?);
    Ok(())
}
