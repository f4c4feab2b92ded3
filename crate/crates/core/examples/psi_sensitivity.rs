//! How the error depends on the floor ψ: below Ψ_max the scaling factor bites,
//! above it the error settles on the plain BDF value.
//!
//!     cargo run --release --example psi_sensitivity

use imex_sav::cli::SchemeId;
use imex_sav::metrics::global_errors;
use imex_sav::problems::problem_by_id;
use imex_sav::reference::{recommended_fine_dt, ReferenceSource};
use imex_sav::trajectory::step_count;

fn main() -> imex_sav::Result<()> {
    let p = problem_by_id("van-der-pol")?;
    let dt = 0.01;
    let source = ReferenceSource::for_problem(&p, recommended_fine_dt(p.id))?;
    let refs = source.states(&p, dt, step_count(p.t_end, dt))?;
    println!("Ψ_max ≈ {:.3}", p.psi_max_estimate);
    println!("{:>10} {:>12} {:>12}", "ψ/Ψ_max", "k=2 e_u", "k=4 e_u");
    for e in -3..=3 {
        let ratio = 10f64.powi(e);
        let psi = ratio * p.psi_max_estimate;
        let mut row = format!("{ratio:>10.0e}");
        for k in [2, 4] {
            let traj = SchemeId::Sav(k).run(&p, dt, psi, p.t_end)?;
            row += &format!(" {:>12.4e}", global_errors(&traj, &refs)?[0]);
        }
        println!("{row}");
    }
    Ok(())
}
