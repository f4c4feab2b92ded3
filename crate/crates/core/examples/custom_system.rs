//! A user-defined two-DOF system with a cubic coupling spring, integrated with
//! ψ taken from a pre-pass that measures the nonlinear-force bound.
//!
//!     cargo run --release --example custom_system

use nalgebra::{DMatrix, DVector};

use imex_sav::bdf_sav::{psi_from_prepass, SavRunConfig};
use imex_sav::system::validate_system;
use imex_sav::SecondOrderSystem;

fn main() -> imex_sav::Result<()> {
    let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]));
    let k = DMatrix::from_row_slice(2, 2, &[30.0, -10.0, -10.0, 10.0]);
    let c = &k * 0.01;
    let k3 = 50.0;
    let sys = SecondOrderSystem::new(m, c, k)?
        .with_nonlinear(move |u, _, _| {
            let d = u[1] - u[0];
            DVector::from_vec(vec![-k3 * d.powi(3), k3 * d.powi(3)])
        })
        .with_tangent(move |u, _, _| {
            let s = 3.0 * k3 * (u[1] - u[0]).powi(2);
            (DMatrix::from_row_slice(2, 2, &[s, -s, -s, s]), DMatrix::zeros(2, 2))
        })
        .velocity_independent();
    println!("validation: {:?}", validate_system(&sys));

    let u0 = DVector::from_vec(vec![0.0, 1.0]);
    let v0 = DVector::zeros(2);
    for dt in [0.01, 0.1, 1.0] {
        let cfg = SavRunConfig::new(2, dt, 1.0, 200.0 * dt)?;
        let run = psi_from_prepass(&sys, &cfg, &u0, &v0, 1e-12)?;
        let max_psi = run.trajectory.pseudo_energies(&sys).into_iter().fold(0.0, f64::max);
        println!(
            "Δt = {dt:>5}: ψ = {:.3e}, max Ψ = {max_psi:.4}, final u = {:.4?}",
            run.psi,
            run.trajectory.last().map(|s| s.u.as_slice().to_vec()).unwrap_or_default()
        );
    }
    Ok(())
}
