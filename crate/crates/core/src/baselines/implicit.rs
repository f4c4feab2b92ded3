//! Implicit one-step baselines solved with Newton-Raphson.
//!
//! Every implicit stage writes the unknown displacement and velocity as affine
//! functions of the unknown acceleration, `u(a) = c_u a + u₀`, `v(a) = c_v a + v₀`,
//! and drives
//!
//! ```text
//! R(a) = w_m M a + w_f [C v(a) + K u(a) + f_nl(u(a), v(a), t) − f_ext(t)] + r₀
//! ```
//!
//! to zero with the tangent `w_m M + w_f [c_v C + c_u K + c_u ∂f/∂u + c_v ∂f/∂v]`.
//! The acceleration unknown keeps the residual free of `O(1/Δt²)` cancellation,
//! so the absolute tolerance stays reachable at very small steps. Newton
//! iterates are invariant under this affine change of unknown.

use nalgebra::DVector;

use super::newton::{newton_solve, NewtonConfig};
use super::{drive, StepOutput};
use crate::error::{Error, Result};
use crate::system::{SecondOrderSystem, State};
use crate::trajectory::{CostStats, Trajectory};

struct Stage<'a> {
    t: f64,
    cu: f64,
    u_off: DVector<f64>,
    cv: f64,
    v_off: DVector<f64>,
    wm: f64,
    wf: f64,
    extra: Option<&'a DVector<f64>>,
}

impl Stage<'_> {
    fn kinematics(&self, a: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        (a * self.cu + &self.u_off, a * self.cv + &self.v_off)
    }

    /// Acceleration whose displacement is `u`.
    fn acceleration_for(&self, u: &DVector<f64>) -> DVector<f64> {
        (u - &self.u_off) / self.cu
    }
}

/// Solves one implicit stage from the acceleration guess `guess`; returns `(u, v, a)`.
fn solve_stage(
    sys: &SecondOrderSystem,
    cfg: &NewtonConfig,
    stage: &Stage,
    guess: &DVector<f64>,
    stats: &mut CostStats,
) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
    let m = sys.mass();
    let c = sys.damping();
    let k = sys.stiffness();
    let f_ext = sys.external_force(stage.t);
    let residual = |a: &DVector<f64>| {
        let (u, v) = stage.kinematics(a);
        let mut f = c * &v + k * &u - &f_ext;
        if sys.has_nonlinear() {
            f += sys.nonlinear_force(&u, &v, stage.t);
        }
        let mut r = m * a * stage.wm + f * stage.wf;
        if let Some(e) = stage.extra {
            r += e;
        }
        r
    };
    let jacobian = |a: &DVector<f64>| {
        let mut j = c * stage.cv + k * stage.cu;
        if sys.has_nonlinear() {
            let (u, v) = stage.kinematics(a);
            let (du, dv) = sys.nonlinear_tangent(&u, &v, stage.t);
            j += du * stage.cu + dv * stage.cv;
        }
        m * stage.wm + j * stage.wf
    };
    let out = newton_solve(residual, jacobian, guess, cfg)?;
    stats.linear_solves += out.iterations;
    stats.newton_iterations += out.iterations;
    stats.newton_substeps += 1;
    let (u, v) = stage.kinematics(&out.x);
    Ok((u, v, out.x))
}

// Every stage starts Newton from the displacement `u + h v + h²/2 a` of its
// start state. For the Newmark-type stages this is exactly `a_{n+1} = a_n`.

/// One trapezoidal (average-acceleration) stage of length `h` from `s`.
fn trapezoidal_stage(
    sys: &SecondOrderSystem,
    cfg: &NewtonConfig,
    s: &State,
    h: f64,
    stats: &mut CostStats,
) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
    let stage = Stage {
        t: s.t + h,
        cu: 0.25 * h * h,
        u_off: &s.u + &s.v * h + &s.a * (0.25 * h * h),
        cv: 0.5 * h,
        v_off: &s.v + &s.a * (0.5 * h),
        wm: 1.0,
        wf: 1.0,
        extra: None,
    };
    solve_stage(sys, cfg, &stage, &s.a, stats)
}

/// Newmark trapezoidal rule (`β = 1/4`, `γ = 1/2`):
///
/// ```text
/// u_{n+1} = u_n + Δt v_n + Δt²/4 (a_n + a_{n+1})
/// v_{n+1} = v_n + Δt/2 (a_n + a_{n+1})
/// ```
///
/// with equilibrium enforced at `t_{n+1}`.
pub fn integrate_newmark_tr(
    sys: &SecondOrderSystem,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    newton: &NewtonConfig,
) -> Result<Trajectory> {
    newmark_tr(sys, dt, t_end, u0, v0, newton, 1)
}

pub(crate) fn newmark_tr(
    sys: &SecondOrderSystem,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    newton: &NewtonConfig,
    stride: usize,
) -> Result<Trajectory> {
    drive(sys, "tr", dt, t_end, u0, v0, stride, |s, stats| {
        let (u, v, a) = trapezoidal_stage(sys, newton, s, dt, stats)?;
        Ok(StepOutput { u, v, a })
    })
}

/// Parameters of the generalized-α method for spectral radius `ρ∞ ∈ [0, 1]`:
/// `(α_m, α_f, γ, β)`.
pub fn generalized_alpha_parameters(rho_inf: f64) -> (f64, f64, f64, f64) {
    let am = (2.0 * rho_inf - 1.0) / (rho_inf + 1.0);
    let af = rho_inf / (rho_inf + 1.0);
    let gamma = 0.5 - am + af;
    let beta = 0.25 * (1.0 - am + af).powi(2);
    (am, af, gamma, beta)
}

/// Generalized-α method. Newmark kinematics with `(β, γ)` and the balance
///
/// ```text
/// (1 − α_m) M a_{n+1} + α_m M a_n + (1 − α_f) F_{n+1} + α_f F_n = 0,
/// F = C v + K u + f_nl(u, v, t) − f_ext(t).
/// ```
///
/// `ρ∞ = 1` gives the trapezoidal rule; `ρ∞ = 0` annihilates the highest
/// frequencies in one step.
pub fn integrate_generalized_alpha(
    sys: &SecondOrderSystem,
    rho_inf: f64,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    newton: &NewtonConfig,
) -> Result<Trajectory> {
    generalized_alpha(sys, rho_inf, dt, t_end, u0, v0, newton, 1)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn generalized_alpha(
    sys: &SecondOrderSystem,
    rho_inf: f64,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    newton: &NewtonConfig,
    stride: usize,
) -> Result<Trajectory> {
    if !(0.0..=1.0).contains(&rho_inf) {
        return Err(Error::InvalidConfig(format!("rho_inf must lie in [0, 1], got {rho_inf}")));
    }
    let (am, af, gamma, beta) = generalized_alpha_parameters(rho_inf);
    let name = format!("generalized-alpha({rho_inf})");
    drive(sys, &name, dt, t_end, u0, v0, stride, |s, stats| {
        let mut f_n = sys.damping() * &s.v + sys.stiffness() * &s.u - sys.external_force(s.t);
        if sys.has_nonlinear() {
            f_n += sys.nonlinear_force(&s.u, &s.v, s.t);
        }
        let extra = sys.mass() * &s.a * am + f_n * af;
        let stage = Stage {
            t: s.t + dt,
            cu: beta * dt * dt,
            u_off: &s.u + &s.v * dt + &s.a * ((0.5 - beta) * dt * dt),
            cv: gamma * dt,
            v_off: &s.v + &s.a * ((1.0 - gamma) * dt),
            wm: 1.0 - am,
            wf: 1.0 - af,
            extra: Some(&extra),
        };
        let (u, v, a) = solve_stage(sys, newton, &stage, &s.a, stats)?;
        Ok(StepOutput { u, v, a })
    })
}

/// Standard two-sub-step Bathe method: a trapezoidal sub-step to
/// `t_n + γΔt`, then the three-point backward Euler formula
///
/// ```text
/// v_{n+1} = c₁ u_n + c₂ u_{n+γ} + c₃ u_{n+1}
/// a_{n+1} = c₁ v_n + c₂ v_{n+γ} + c₃ v_{n+1}
/// c₁ = (1 − γ)/(γΔt), c₂ = −1/((1 − γ)γΔt), c₃ = (2 − γ)/((1 − γ)Δt).
/// ```
pub fn integrate_bathe(
    sys: &SecondOrderSystem,
    gamma: f64,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    newton: &NewtonConfig,
) -> Result<Trajectory> {
    bathe(sys, gamma, dt, t_end, u0, v0, newton, 1)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn bathe(
    sys: &SecondOrderSystem,
    gamma: f64,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    newton: &NewtonConfig,
    stride: usize,
) -> Result<Trajectory> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidConfig(format!("Bathe gamma must lie in (0, 1), got {gamma}")));
    }
    let c1 = (1.0 - gamma) / (gamma * dt);
    let c2 = -1.0 / ((1.0 - gamma) * gamma * dt);
    let c3 = (2.0 - gamma) / ((1.0 - gamma) * dt);
    let name = format!("bathe({gamma})");
    drive(sys, &name, dt, t_end, u0, v0, stride, |s, stats| {
        let (um, vm, am) = trapezoidal_stage(sys, newton, s, gamma * dt, stats)?;
        let mid = State {
            t: s.t + gamma * dt,
            u: um,
            v: vm,
            a: am,
        };
        // v = c₁u_n + c₂u_m + c₃u and a = c₁v_n + c₂v_m + c₃v, inverted for (u, v)
        let v_off = -(&s.v * c1 + &mid.v * c2) / c3;
        let u_off = (&v_off - &s.u * c1 - &mid.u * c2) / c3;
        let stage = Stage {
            t: s.t + dt,
            cu: 1.0 / (c3 * c3),
            u_off,
            cv: 1.0 / c3,
            v_off,
            wm: 1.0,
            wf: 1.0,
            extra: None,
        };
        let h = (1.0 - gamma) * dt;
        let guess = stage.acceleration_for(&(&mid.u + &mid.v * h + &mid.a * (0.5 * h * h)));
        let (u, v, a) = solve_stage(sys, newton, &stage, &guess, stats)?;
        Ok(StepOutput { u, v, a })
    })
}
