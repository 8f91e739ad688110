//! Left-multiplying every basis by a gauge that fixes |1⟩ and |2⟩ up to
//! phases leaves the objective unchanged.
//!
//! Run with `cargo run --example gauge_symmetry`.

use rand::Rng;
use zeno_subspace::channel::{construct_gauge, objective, ControlProblem, MeasurementSequence, UnitaryMatrix};
use zeno_subspace::Result;

fn main() -> Result<()> {
    let mut rng = rand::rng();
    let n = 4;
    let problem = ControlProblem::orthogonal(n, 3)?;
    let seq = MeasurementSequence::new(n, (0..3).map(|_| UnitaryMatrix::haar(n, &mut rng)).collect())?;
    let j = objective(&seq, &problem)?;
    println!("J = {j:.15}");

    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let psi1 = rng.random_range(0.0..std::f64::consts::TAU);
        let psi2 = rng.random_range(0.0..std::f64::consts::TAU);
        let gauge = construct_gauge(psi1, psi2, &UnitaryMatrix::haar(n - 2, &mut rng));
        let moved = objective(&seq.left_multiplied(&gauge)?, &problem)?;
        worst = worst.max((moved - j).abs());
    }
    println!("largest change over 100 gauges: {worst:.1e}");

    // A generic unitary is not a symmetry.
    let other = objective(&seq.left_multiplied(&UnitaryMatrix::haar(n, &mut rng))?, &problem)?;
    println!("after a random unitary instead: J = {other:.15}");
    Ok(())
}
