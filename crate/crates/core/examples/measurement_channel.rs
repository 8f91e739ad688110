//! A single non-selective measurement on a qubit and on a qutrit.
//!
//! Run with `cargo run --example measurement_channel`.

use std::f64::consts::PI;

use zeno_subspace::channel::{apply_measurement, basis_pure_state, MeasurementSequence, UnitaryMatrix, propagate};
use zeno_subspace::oracle::{project, BlochVector};
use zeno_subspace::Result;

fn main() -> Result<()> {
    // Measuring |1⟩ in a basis tilted by π/4 from the z axis.
    let axis = BlochVector::from_angles(PI / 4.0, 0.0);
    let u = axis.measurement_basis()?;
    let rho = basis_pure_state(2, 0)?;
    let after = apply_measurement(&u, &rho)?;
    println!("state after one measurement:\n{:?}", after.matrix());
    println!("purity {:.4} -> {:.4}", rho.purity(), after.purity());

    // The same thing on the Bloch ball: projection onto the axis.
    let r = project(&BlochVector::north(), &axis)?;
    let from_channel = BlochVector::from_density(&after)?;
    println!("Bloch projection {:?}\nfrom the channel {:?}", r, from_channel);

    // Measuring twice in the same basis changes nothing more.
    let twice = propagate(&MeasurementSequence::new(2, vec![u.clone(), u])?, &rho)?;
    println!("idempotent: {}", twice.matrix().distance(after.matrix()) < 1e-12);

    // A random qutrit basis dephases the state into its eigenbasis mixture.
    let mut rng = rand::rng();
    let v = UnitaryMatrix::haar(3, &mut rng);
    let mixed = apply_measurement(&v, &basis_pure_state(3, 0)?)?;
    println!("random qutrit measurement leaves purity {:.4}", mixed.purity());
    Ok(())
}
