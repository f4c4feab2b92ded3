use nalgebra::DVector;

use super::integrate::{integrate_sav, SavRunConfig};
use crate::error::Result;
use crate::system::SecondOrderSystem;
use crate::trajectory::Trajectory;

/// `2Δt² · maxₙ ‖L⁻¹ f_nl(uₙ, vₙ, tₙ)‖²` over the states of `traj`, with `M = LLᵀ`.
pub fn nonlinear_psi_bound(sys: &SecondOrderSystem, traj: &Trajectory, dt: f64) -> Result<f64> {
    let mass = sys.mass_factor()?;
    let max_sq = traj
        .states
        .iter()
        .map(|s| mass.solve_lower(&sys.nonlinear_force(&s.u, &s.v, s.t)).norm_squared())
        .fold(0.0, f64::max);
    Ok(2.0 * dt * dt * max_sq)
}

/// Result of [`psi_from_prepass`].
#[derive(Debug, Clone)]
pub struct PsiPrepass {
    /// Bound measured on the preliminary run, used as `ψ` for the final run.
    pub psi: f64,
    /// The same bound measured on the final run's own states.
    pub final_bound: f64,
    pub trajectory: Trajectory,
}

impl PsiPrepass {
    /// The final run satisfied `ψ ≥ 2Δt² max‖L⁻¹f_nl‖²` along its own states.
    pub fn satisfied(&self) -> bool {
        self.psi >= self.final_bound
    }
}

/// Runs once with `cfg.psi`, measures [`nonlinear_psi_bound`] on that run and
/// reruns with the measured value (at least `floor`) as `ψ`.
pub fn psi_from_prepass(
    sys: &SecondOrderSystem,
    cfg: &SavRunConfig,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    floor: f64,
) -> Result<PsiPrepass> {
    let pre = integrate_sav(sys, cfg, u0, v0)?;
    let mut cfg = cfg.clone();
    cfg.psi = nonlinear_psi_bound(sys, &pre, cfg.dt)?.max(floor);
    let trajectory = integrate_sav(sys, &cfg, u0, v0)?;
    Ok(PsiPrepass {
        psi: cfg.psi,
        final_bound: nonlinear_psi_bound(sys, &trajectory, cfg.dt)?,
        trajectory,
    })
}
