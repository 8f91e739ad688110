//! Random rank-two states in the leading pair of levels: does the qubit
//! restriction still reach the unrestricted optimum?
//!
//! Run with `cargo run --release --example mixed_states`.

use zeno_subspace::experiments::{mixed, MixedSpec};
use zeno_subspace::optimizer::OptimizerConfig;
use zeno_subspace::Result;

fn main() -> Result<()> {
    let spec = MixedSpec {
        n: 3,
        m: 2,
        trials: 10,
        base_seed: 100,
        config: OptimizerConfig { restarts: 8, ..OptimizerConfig::default() },
    };
    let report = mixed(&spec)?;
    for r in &report.rows {
        println!(
            "seed {}: spectra {:.3?} / {:.3?}  full {:.10}  restricted {:.10}  gap {:+.1e}",
            r.seed, r.spectrum_initial, r.spectrum_target, r.j_full, r.j_restricted, r.gap
        );
    }
    println!("max |gap| = {:.1e}", report.max_abs_gap);
    Ok(())
}
