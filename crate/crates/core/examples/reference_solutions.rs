//! Reference trajectories for problems without a closed form: fine RK4 and
//! Bathe runs cross-checked against each other, then queried on a coarse grid.
//!
//!     cargo run --release --example reference_solutions

use imex_sav::problems::problem_by_id;
use imex_sav::reference::{cross_validate, recommended_fine_dt, ReferenceSource};

fn main() -> imex_sav::Result<()> {
    for id in ["van-der-pol", "duffing"] {
        let p = problem_by_id(id)?;
        let fine = recommended_fine_dt(id);
        let dt = p.t_end / 200.0;
        let check = cross_validate(&p, dt, fine, 1e-8)?;
        let [du, dv, da] = check.difference;
        println!("{id}: fine Δt {fine:e}, RK4/Bathe difference u/v/a {du:.2e}/{dv:.2e}/{da:.2e}");
        let source = ReferenceSource::for_problem(&p, fine)?;
        let states = source.states(&p, dt, 200)?;
        for s in states.iter().step_by(50) {
            println!("   t = {:6.3}  u = {:10.6}  v = {:10.6}", s.t, s.u[0], s.v[0]);
        }
    }
    Ok(())
}
