//! Explicit baselines.
//!
//! Central difference (standard, velocity Verlet form):
//!
//! ```text
//! v_{n+1/2} = v_n + Δt/2 a_n
//! u_{n+1}   = u_n + Δt v_{n+1/2}
//! (M + Δt/2 C) a_{n+1} = f_ext − C v_{n+1/2} − K u_{n+1} − f_nl(u_{n+1})
//! v_{n+1}   = v_{n+1/2} + Δt/2 a_{n+1}
//! ```
//!
//! The Park–Underwood variant replaces the velocity in the force evaluation by
//! the lagged extrapolation `v* = (3 v_{n+1/2} − v_{n−1/2}) / 2`, with
//! `v_{−1/2} = v_0 − Δt/2 a_0`, and solves with `M` only.

use nalgebra::DVector;

use super::{drive, StepOutput};
use crate::error::{Error, Result};
use crate::linalg::cholesky;
use crate::rk::{acceleration, rk_step, ExplicitTableau};
use crate::system::SecondOrderSystem;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CentralDifferenceVariant {
    Standard,
    ParkUnderwood,
}

pub fn integrate_central_difference(
    sys: &SecondOrderSystem,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    variant: CentralDifferenceVariant,
) -> Result<Trajectory> {
    central_difference(sys, dt, t_end, u0, v0, variant, 1)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn central_difference(
    sys: &SecondOrderSystem,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    variant: CentralDifferenceVariant,
    stride: usize,
) -> Result<Trajectory> {
    match variant {
        CentralDifferenceVariant::Standard => {
            if sys.has_nonlinear() && sys.nonlinear_depends_on_velocity() {
                return Err(Error::InvalidConfig(
                    "standard central difference needs a velocity-independent nonlinear force; \
                     use the Park-Underwood variant"
                        .into(),
                ));
            }
            let lhs = cholesky(&(sys.mass() + sys.damping() * (0.5 * dt)))?;
            drive(sys, "cd", dt, t_end, u0, v0, stride, |s, stats| {
                let v_half = &s.v + &s.a * (0.5 * dt);
                let u = &s.u + &v_half * dt;
                let t = s.t + dt;
                let mut rhs = sys.external_force(t) - sys.damping() * &v_half - sys.stiffness() * &u;
                if sys.has_nonlinear() {
                    rhs -= sys.nonlinear_force(&u, &v_half, t);
                }
                let a = lhs.solve(&rhs);
                stats.linear_solves += 1;
                let v = v_half + &a * (0.5 * dt);
                Ok(StepOutput { u, v, a })
            })
        }
        CentralDifferenceVariant::ParkUnderwood => {
            let mass = sys.ensure_valid()?;
            let mut v_prev_half: Option<DVector<f64>> = None;
            drive(sys, "cd-pu", dt, t_end, u0, v0, stride, |s, stats| {
                let v_half = &s.v + &s.a * (0.5 * dt);
                let lagged = v_prev_half
                    .take()
                    .unwrap_or_else(|| &s.v - &s.a * (0.5 * dt));
                let v_star = (&v_half * 3.0 - lagged) * 0.5;
                let u = &s.u + &v_half * dt;
                let a = acceleration(sys, &mass, &u, &v_star, s.t + dt);
                stats.linear_solves += 1;
                let v = &v_half + &a * (0.5 * dt);
                v_prev_half = Some(v_half);
                Ok(StepOutput { u, v, a })
            })
        }
    }
}

/// Classical fourth-order Runge-Kutta on the first-order form; four mass solves per step.
pub fn integrate_rk4(
    sys: &SecondOrderSystem,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
) -> Result<Trajectory> {
    rk4(sys, dt, t_end, u0, v0, 1)
}

pub(crate) fn rk4(
    sys: &SecondOrderSystem,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    stride: usize,
) -> Result<Trajectory> {
    let mass = sys.ensure_valid()?;
    let tab = ExplicitTableau::classical_rk4();
    drive(sys, "rk4", dt, t_end, u0, v0, stride, |s, stats| {
        let (u, v) = rk_step(sys, &mass, &tab, s.t, &s.u, &s.v, dt);
        stats.linear_solves += 4;
        let a = acceleration(sys, &mass, &u, &v, s.t + dt);
        Ok(StepOutput { u, v, a })
    })
}
