//! Normalized maximum errors ε(u, v, a) on the manufactured spring pendulum
//! for every SAV order and the implicit baselines.
//!
//!     cargo run --release --example spring_pendulum_table

use std::time::Instant;

use imex_sav::cli::SchemeId;
use imex_sav::metrics::ErrorReport;
use imex_sav::problems::problem_by_id;
use imex_sav::trajectory::step_count;

fn main() -> imex_sav::Result<()> {
    let p = problem_by_id("spring-pendulum")?;
    let ranges = p.exact_ranges(20_000).expect("closed form");
    let dt = p.period / 20.0;
    let schemes = ["sav1", "sav2", "sav3", "sav4", "sav5", "tr", "generalized-alpha(0)", "bathe(0.5)"];
    println!("{:<22} {:>8} {:>8} {:>8}", "scheme (Δt = T/20)", "ε_u %", "ε_v %", "ε_a %");
    for name in schemes {
        let s: SchemeId = name.parse()?;
        let step = dt * s.n_sub() as f64;
        let start = Instant::now();
        let traj = s.run(&p, step, 49.0, p.t_end)?;
        let refs = p.exact_on_grid(step, step_count(p.t_end, step)).expect("closed form");
        let r = ErrorReport::with_ranges(&traj, &refs, ranges, start.elapsed())?;
        println!(
            "{:<22} {:>8.3} {:>8.3} {:>8.3}",
            s.to_string(),
            100.0 * r.eps_max[0],
            100.0 * r.eps_max[1],
            100.0 * r.eps_max[2]
        );
    }
    Ok(())
}
