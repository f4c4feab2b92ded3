//! The comparison schemes on the simple pendulum: period elongation,
//! amplitude decay and Newton iterations, at equal linear-solve budgets.
//!
//!     cargo run --release --example baselines

use imex_sav::baselines::{BaselineScheme, NewtonConfig};
use imex_sav::metrics::period_elongation_amplitude_decay;
use imex_sav::problems::{problem_by_id, PendulumSolution};

fn main() -> imex_sav::Result<()> {
    let p = problem_by_id("pendulum")?;
    let sol = PendulumSolution::new(1.0, 0.0, 1.95)?;
    let dt = sol.period() / 100.0;
    let schemes = [
        BaselineScheme::NewmarkTr,
        BaselineScheme::GeneralizedAlpha(0.0),
        BaselineScheme::Bathe(0.5),
        BaselineScheme::CentralDifference,
        BaselineScheme::Rk4,
        BaselineScheme::ImexBdf(3),
    ];
    println!("{:<24} {:>9} {:>9} {:>8}", "scheme", "PE %", "AD %", "Newton");
    for s in schemes {
        let step = dt * s.n_sub() as f64;
        let traj = s.run(&p.system, step, p.t_end, &p.u0, &p.v0, &NewtonConfig::default())?;
        let r = period_elongation_amplitude_decay(&traj, 0, sol.first_peak_time() + sol.period(), sol.amplitude());
        println!(
            "{:<24} {:>9.4} {:>9.4} {:>8.3}",
            traj.scheme,
            r.pe_pct.unwrap_or(f64::NAN),
            r.ad_pct.unwrap_or(f64::NAN),
            traj.stats.average_newton_iterations()
        );
    }
    Ok(())
}
