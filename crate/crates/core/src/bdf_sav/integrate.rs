use nalgebra::DVector;

use super::coefficients::{beta_parameter, BdfCoefficients};
use super::step::{
    apply_update, recovery_check, sav_update, scaling_factor, HistoryBuffer, ImexBdfStepper,
    SavUpdate,
};
use crate::error::{Error, Result};
use crate::linalg::CholeskyFactor;
use crate::rk::{acceleration, rk_step, ExplicitTableau};
use crate::system::{pseudo_energy, theta, SecondOrderSystem, State};
use crate::trajectory::{diverged, step_count, SavHistory, StepDiagnostics, Trajectory};

pub const DEFAULT_EPS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct SavRunConfig {
    pub k: usize,
    pub dt: f64,
    pub psi: f64,
    pub eps_tol: f64,
    pub beta: u32,
    pub t_end: f64,
}

impl SavRunConfig {
    /// Config with the default `ε_tol` and the order's own `β`.
    pub fn new(k: usize, dt: f64, psi: f64, t_end: f64) -> Result<Self> {
        let cfg = Self {
            k,
            dt,
            psi,
            eps_tol: DEFAULT_EPS_TOL,
            beta: beta_parameter(k)?,
            t_end,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_beta(mut self, beta: u32) -> Result<Self> {
        self.beta = beta;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps_tol(mut self, eps_tol: f64) -> Result<Self> {
        self.eps_tol = eps_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        beta_parameter(self.k)?;
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.psi > 0.0 && self.psi.is_finite()) {
            return bad(format!("psi must be positive, got {}", self.psi));
        }
        if !(self.eps_tol > 0.0 && self.eps_tol < 1.0) {
            return bad(format!("eps_tol must lie in (0, 1), got {}", self.eps_tol));
        }
        if self.beta < 2 || 2 * self.beta as usize <= self.k + 1 {
            return bad(format!("beta = {} too small for order {}", self.beta, self.k));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        Ok(())
    }
}

/// The `k − 1` states at `t0 + dt, …, t0 + (k−1)dt` from an explicit
/// Runge-Kutta method of order `k − 1`. Empty for `k = 1`.
pub fn starting_steps(
    sys: &SecondOrderSystem,
    k: usize,
    dt: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
) -> Result<Vec<State>> {
    beta_parameter(k)?;
    let mass = sys.ensure_valid()?;
    Ok(starting_with(sys, &mass, k, dt, 0.0, u0, v0, k - 1))
}

#[allow(clippy::too_many_arguments)]
fn starting_with(
    sys: &SecondOrderSystem,
    mass: &CholeskyFactor,
    k: usize,
    dt: f64,
    t0: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    count: usize,
) -> Vec<State> {
    if k < 2 {
        return Vec::new();
    }
    let tab = ExplicitTableau::of_order(k - 1).expect("order checked by caller");
    let mut out = Vec::with_capacity(count);
    let (mut u, mut v) = (u0.clone(), v0.clone());
    for i in 0..count {
        let t = t0 + i as f64 * dt;
        let (un, vn) = rk_step(sys, mass, &tab, t, &u, &v, dt);
        let tn = t0 + (i + 1) as f64 * dt;
        let a = acceleration(sys, mass, &un, &vn, tn);
        out.push(State {
            t: tn,
            u: un.clone(),
            v: vn.clone(),
            a,
        });
        u = un;
        v = vn;
    }
    out
}

/// One IMEX-BDFk-SAV step with a cached effective factorization.
pub struct SavStepper<'a> {
    sys: &'a SecondOrderSystem,
    bdf: ImexBdfStepper<'a>,
    params: SavParams,
}

impl<'a> SavStepper<'a> {
    pub fn new(sys: &'a SecondOrderSystem, cfg: &SavRunConfig) -> Result<Self> {
        cfg.validate()?;
        let coeffs = BdfCoefficients::new(cfg.k)?;
        Ok(Self {
            sys,
            bdf: ImexBdfStepper::new(sys, coeffs, cfg.dt)?,
            params: SavParams {
                psi: cfg.psi,
                eps_tol: cfg.eps_tol,
                beta: cfg.beta,
            },
        })
    }

    /// Advances from the history ending at `t_next − Δt` with auxiliary
    /// value `phi_n`. Returns the scaled state and the step diagnostics, or
    /// [`Error::NonFinite`] (with step 0) if the predictor is not finite.
    pub fn advance(
        &self,
        hist: &HistoryBuffer,
        phi_n: f64,
        t_next: f64,
    ) -> Result<(DVector<f64>, DVector<f64>, StepDiagnostics)> {
        let (u_im, v_im) = self.bdf.step(hist, t_next);
        if !all_finite(&u_im, &v_im) {
            return Err(Error::NonFinite { step: 0 });
        }
        Ok(sav_scale(self.sys, &self.params, self.bdf.dt(), phi_n, u_im, v_im, t_next))
    }
}

struct SavParams {
    psi: f64,
    eps_tol: f64,
    beta: u32,
}

/// Update, scaling and recovery applied to the implicit predictor.
#[allow(clippy::too_many_arguments)]
fn sav_scale(
    sys: &SecondOrderSystem,
    p: &SavParams,
    dt: f64,
    phi_n: f64,
    u_im: DVector<f64>,
    v_im: DVector<f64>,
    t_next: f64,
) -> (DVector<f64>, DVector<f64>, StepDiagnostics) {
    let psi_im = pseudo_energy(sys, &u_im, &v_im);
    let theta_im = theta(sys, &u_im, &v_im, t_next);
    let (update, xi, upsilon) = if psi_im.is_finite() && theta_im.is_finite() {
        let upd = sav_update(phi_n, psi_im, theta_im, dt, p.psi);
        let (xi, ups) = scaling_factor(upd.phi, psi_im, p.psi, p.beta);
        (upd, xi, ups)
    } else {
        let upd = SavUpdate {
            phi: phi_n,
            clamped: true,
        };
        (upd, 0.0, 0.0)
    };
    let (u, v) = if upsilon == 0.0 {
        (DVector::zeros(u_im.len()), DVector::zeros(v_im.len()))
    } else {
        apply_update(&u_im, &v_im, upsilon)
    };
    let (phi, recovery_triggered) = recovery_check(update.phi, upsilon, psi_im, p.psi, p.eps_tol);
    let diag = StepDiagnostics {
        xi,
        upsilon,
        phi,
        psi_im,
        theta_im,
        recovery_triggered,
        clamped: update.clamped,
    };
    (u, v, diag)
}

/// Runs Algorithm-1 style time stepping. With `sav = None` this is the plain
/// IMEX-BDFk scheme (`Υ ≡ 1`), whose divergence is recorded rather than raised.
#[allow(clippy::too_many_arguments)]
fn run_bdf(
    sys: &SecondOrderSystem,
    scheme: String,
    k: usize,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    sav: Option<SavParams>,
) -> Result<Trajectory> {
    let mass = sys.ensure_valid()?;
    sys.check_vector("u0", u0)?;
    sys.check_vector("v0", v0)?;
    let coeffs = BdfCoefficients::new(k)?;
    let n_steps = step_count(t_end, dt);
    let mut traj = Trajectory::new(scheme, dt, n_steps + 1);
    let stepper = ImexBdfStepper::new(sys, coeffs, dt)?;

    let a0 = acceleration(sys, &mass, u0, v0, 0.0);
    traj.stats.startup_solves += 1;
    traj.states.push(State {
        t: 0.0,
        u: u0.clone(),
        v: v0.clone(),
        a: a0,
    });

    let n_start = (k - 1).min(n_steps);
    let start = starting_with(sys, &mass, k, dt, 0.0, u0, v0, n_start);
    let stages = ExplicitTableau::of_order(k.saturating_sub(1)).map_or(0, |t| t.stages());
    traj.stats.startup_solves += n_start * (stages + 1);
    for (i, s) in start.into_iter().enumerate() {
        if out_of_range(sav.is_some(), &s.u, &s.v) || !s.a.iter().all(|x| x.is_finite()) {
            return flag_divergence(traj, sav.is_some(), i + 1);
        }
        traj.states.push(s);
    }
    if n_start < k - 1 {
        if let Some(p) = &sav {
            let last = traj.last().expect("initial state pushed");
            traj.sav = Some(SavHistory {
                first_step: n_start,
                phi: vec![pseudo_energy(sys, &last.u, &last.v) + p.psi],
                diagnostics: Vec::new(),
            });
        }
        return Ok(traj);
    }

    // newest first
    let mut hist = HistoryBuffer::from_newest_first(
        traj.states
            .iter()
            .rev()
            .map(|s| (s.u.clone(), s.v.clone()))
            .collect(),
    );
    let mut phi = match &sav {
        Some(p) => {
            let last = traj.last().expect("history is non-empty");
            let phi0 = pseudo_energy(sys, &last.u, &last.v) + p.psi;
            traj.sav = Some(SavHistory {
                first_step: k - 1,
                phi: vec![phi0],
                diagnostics: Vec::with_capacity(n_steps + 1 - k),
            });
            phi0
        }
        None => 0.0,
    };

    for n in (k - 1)..n_steps {
        let t_next = (n + 1) as f64 * dt;
        let (u_im, v_im) = stepper.step(&hist, t_next);
        traj.stats.linear_solves += 1;
        let (u, v) = match &sav {
            None => (u_im, v_im),
            Some(p) => {
                if !all_finite(&u_im, &v_im) {
                    return Err(Error::NonFinite { step: n + 1 });
                }
                let (u, v, diag) = sav_scale(sys, p, dt, phi, u_im, v_im, t_next);
                let log = traj.sav.as_mut().expect("seeded above");
                log.phi.push(diag.phi);
                log.diagnostics.push(diag);
                phi = diag.phi;
                (u, v)
            }
        };
        if out_of_range(sav.is_some(), &u, &v) {
            return flag_divergence(traj, sav.is_some(), n + 1);
        }
        let a = acceleration(sys, &mass, &u, &v, t_next);
        if !a.iter().all(|x| x.is_finite()) {
            return flag_divergence(traj, sav.is_some(), n + 1);
        }
        hist.push(u.clone(), v.clone());
        traj.states.push(State { t: t_next, u, v, a });
    }
    Ok(traj)
}

fn all_finite(u: &DVector<f64>, v: &DVector<f64>) -> bool {
    u.iter().chain(v.iter()).all(|x| x.is_finite())
}

/// The plain scheme stops at the overflow guard; the SAV scheme only on
/// genuinely non-finite values.
fn out_of_range(is_sav: bool, u: &DVector<f64>, v: &DVector<f64>) -> bool {
    if is_sav {
        !all_finite(u, v)
    } else {
        diverged(u, v)
    }
}

fn flag_divergence(mut traj: Trajectory, is_sav: bool, step: usize) -> Result<Trajectory> {
    if is_sav {
        return Err(Error::NonFinite { step });
    }
    traj.divergence = Some(step);
    Ok(traj)
}

/// Integrates with IMEX-BDFk-SAV from `(u0, v0)` at `t = 0` to `cfg.t_end`.
///
/// A non-finite or overflowing state is reported as [`Error::NonFinite`]:
/// the scheme is meant to keep the pseudo-energy bounded for every `Δt`.
pub fn integrate_sav(
    sys: &SecondOrderSystem,
    cfg: &SavRunConfig,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
) -> Result<Trajectory> {
    cfg.validate()?;
    run_bdf(
        sys,
        format!("imex-bdf{}-sav", cfg.k),
        cfg.k,
        cfg.dt,
        cfg.t_end,
        u0,
        v0,
        Some(SavParams {
            psi: cfg.psi,
            eps_tol: cfg.eps_tol,
            beta: cfg.beta,
        }),
    )
}

/// Conventional IMEX-BDFk: the same stepping without the auxiliary variable.
/// Divergence truncates the trajectory and sets [`Trajectory::divergence`].
pub fn integrate_imex_bdf(
    sys: &SecondOrderSystem,
    k: usize,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
) -> Result<Trajectory> {
    beta_parameter(k)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    run_bdf(sys, format!("imex-bdf{k}"), k, dt, t_end, u0, v0, None)
}
