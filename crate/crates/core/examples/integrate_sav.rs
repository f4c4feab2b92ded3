//! Integrate the forced Duffing oscillator with IMEX-BDF3-SAV and print a few
//! samples of the displacement, the pseudo-energy and the auxiliary variable.
//!
//!     cargo run --release --example integrate_sav

use imex_sav::bdf_sav::{integrate_sav, SavRunConfig};
use imex_sav::problems::problem_by_id;
use imex_sav::system::pseudo_energy;

fn main() -> imex_sav::Result<()> {
    let p = problem_by_id("duffing")?;
    let cfg = SavRunConfig::new(3, 1e-3, p.psi_recommended, p.t_end)?;
    let traj = integrate_sav(&p.system, &cfg, &p.u0, &p.v0)?;

    let sav = traj.sav.as_ref().expect("SAV runs record Φ");
    println!("{} steps, ψ = {:.3e}", traj.len() - 1, cfg.psi);
    println!("{:>8} {:>12} {:>12} {:>14}", "t", "u", "Ψ", "Φ");
    for (i, s) in traj.states.iter().enumerate().step_by(traj.len() / 10) {
        let phi = i.checked_sub(sav.first_step).and_then(|j| sav.phi.get(j));
        println!(
            "{:8.3} {:12.5} {:12.4e} {:>14}",
            s.t,
            s.u[0],
            pseudo_energy(&p.system, &s.u, &s.v),
            phi.map_or("-".into(), |x| format!("{x:.6e}"))
        );
    }
    println!(
        "Φ increases: {}, recoveries: {}, clamps: {}",
        sav.increase_count(),
        sav.recovery_steps().len(),
        sav.clamp_steps().len()
    );
    Ok(())
}
