//! Checks the commutator chain, the structure of the backward states and
//! the block structure of an optimized sequence.
//!
//! Run with `cargo run --release --example verify_stationarity`.

use zeno_subspace::channel::ControlProblem;
use zeno_subspace::optimality::{chain_report, subspace_leakage, tau_structure};
use zeno_subspace::optimizer::{optimize, OptimizerConfig};
use zeno_subspace::Result;

fn main() -> Result<()> {
    let problem = ControlProblem::orthogonal(5, 2)?;
    let result = optimize(&problem, &OptimizerConfig { restarts: 4, ..OptimizerConfig::default() })?;
    let seq = &result.best_sequence;

    let report = chain_report(seq, &problem)?.gauge_fixed();
    println!("J = {:.12}", report.objective);
    println!("chain residual {:.2e}", report.chain_residual);
    println!("c = {:.6} (√3/16 = {:.6})", report.c_value, 3f64.sqrt() / 16.0);
    println!("commutator mass outside the leading 2x2 block: {:.2e}", report.canonical_offblock);

    for k in 1..=problem.m {
        let tau = tau_structure(seq, &problem, k)?;
        println!("B_{k}: trailing block ≈ {:.2e}·I, deviation {:.2e}", tau.d_estimate, tau.deviation);
    }
    for (k, u) in seq.unitaries().iter().enumerate() {
        println!("U_{}: leakage {:.2e}", k + 1, subspace_leakage(u)?);
    }

    // A random sequence is far from stationary.
    let random = optimize(
        &problem,
        &OptimizerConfig { max_iters: 1, restarts: 1, ..OptimizerConfig::default() },
    )?;
    println!("after one step: chain residual {:.2e}", random.report.chain_residual);
    Ok(())
}
