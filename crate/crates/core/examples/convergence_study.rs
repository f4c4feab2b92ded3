//! Global error against step size for IMEX-BDFk-SAV on the forced damped
//! oscillator, with fitted log-log slopes.
//!
//!     cargo run --release --example convergence_study

use imex_sav::cli::SchemeId;
use imex_sav::metrics::{convergence_slope, global_errors, log_space};
use imex_sav::problems::problem_by_id;
use imex_sav::trajectory::step_count;

fn main() -> imex_sav::Result<()> {
    let p = problem_by_id("linear-sdof")?;
    let dts: Vec<f64> = log_space(2e-3 * p.period, 5e-2 * p.period, 8)
        .into_iter()
        .map(|d| p.t_end / (p.t_end / d).round())
        .collect();
    for k in 1..=5 {
        let mut errs = Vec::new();
        for &dt in &dts {
            let traj = SchemeId::Sav(k).run(&p, dt, 5.0, p.t_end)?;
            let exact = p.exact_on_grid(dt, step_count(p.t_end, dt)).expect("closed form");
            errs.push(global_errors(&traj, &exact)?[0]);
        }
        let fit = convergence_slope(&dts, &errs)?;
        println!(
            "k={k}: e_u from {:.2e} to {:.2e}, slope {:.3} (r² = {:.5})",
            errs[0],
            errs[errs.len() - 1],
            fit.slope,
            fit.r_squared
        );
    }
    Ok(())
}
