use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use super::coefficients::BdfCoefficients;
use crate::error::{Error, Result};
use crate::linalg::{self, CholeskyFactor};
use crate::system::SecondOrderSystem;

/// The last `k` displacement/velocity pairs, newest first.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryBuffer {
    capacity: usize,
    entries: VecDeque<(DVector<f64>, DVector<f64>)>,
}

impl HistoryBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            entries: VecDeque::with_capacity(capacity + 1),
        }
    }

    /// Builds a full buffer from `(u, v)` pairs ordered newest first.
    pub fn from_newest_first(entries: Vec<(DVector<f64>, DVector<f64>)>) -> Self {
        let capacity = entries.len();
        Self {
            capacity,
            entries: entries.into(),
        }
    }

    /// Adds the newest entry, evicting the oldest once full.
    pub fn push(&mut self, u: DVector<f64>, v: DVector<f64>) {
        self.entries.push_front((u, v));
        self.entries.truncate(self.capacity);
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry `j` steps back (`0` is the newest).
    pub fn get(&self, j: usize) -> Option<(&DVector<f64>, &DVector<f64>)> {
        self.entries.get(j).map(|(u, v)| (u, v))
    }

    fn weighted(&self, weights: &[f64]) -> (DVector<f64>, DVector<f64>) {
        let n = self.entries[0].0.len();
        let mut su = DVector::zeros(n);
        let mut sv = DVector::zeros(n);
        for (w, (u, v)) in weights.iter().zip(&self.entries) {
            su.axpy(*w, u, 1.0);
            sv.axpy(*w, v, 1.0);
        }
        (su, sv)
    }
}

/// `k`-th order extrapolation `(Σ e_j u_{n−j}, Σ e_j v_{n−j})`.
pub fn extrapolate(coeffs: &BdfCoefficients, hist: &HistoryBuffer) -> (DVector<f64>, DVector<f64>) {
    assert!(hist.len() >= coeffs.k, "history holds fewer than k entries");
    hist.weighted(&coeffs.extrap_weights)
}

/// Solves the implicit-explicit BDF equations for one step.
///
/// Eliminating the BDF velocity and acceleration gives
///
/// ```text
/// [M H²/Δt² + C H/Δt + K] u_im = f_ext − f_nl(u_ex, v_ex) + M (H Σu + Δt Σv)/Δt² + C Σu/Δt
/// v_im = (H u_im − Σu)/Δt
/// ```
///
/// with `Σu = Σ w_j u_{n−j}`, `Σv = Σ w_j v_{n−j}`. The effective matrix is
/// factorized once at construction.
pub struct ImexBdfStepper<'a> {
    sys: &'a SecondOrderSystem,
    coeffs: BdfCoefficients,
    dt: f64,
    effective: CholeskyFactor,
}

impl<'a> ImexBdfStepper<'a> {
    pub fn new(sys: &'a SecondOrderSystem, coeffs: BdfCoefficients, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!("time step must be positive, got {dt}")));
        }
        let h = coeffs.harmonic;
        let eff: DMatrix<f64> =
            sys.mass() * (h * h / (dt * dt)) + sys.damping() * (h / dt) + sys.stiffness();
        let effective = linalg::cholesky(&eff)?;
        Ok(Self {
            sys,
            coeffs,
            dt,
            effective,
        })
    }

    pub fn coefficients(&self) -> &BdfCoefficients {
        &self.coeffs
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Returns `(u_im, v_im)` at `t_next`.
    pub fn step(&self, hist: &HistoryBuffer, t_next: f64) -> (DVector<f64>, DVector<f64>) {
        let sys = self.sys;
        let dt = self.dt;
        let h = self.coeffs.harmonic;
        let (su, sv) = hist.weighted(&self.coeffs.history_weights);

        let mut rhs = sys.external_force(t_next);
        if sys.has_nonlinear() {
            let (u_ex, v_ex) = extrapolate(&self.coeffs, hist);
            rhs -= sys.nonlinear_force(&u_ex, &v_ex, t_next);
        }
        let inertia = (&su * h + &sv * dt) / (dt * dt);
        rhs += sys.mass() * inertia;
        rhs += sys.damping() * (&su / dt);

        let u_im = self.effective.solve(&rhs);
        let v_im = (&u_im * h - su) / dt;
        (u_im, v_im)
    }
}

/// One implicit-explicit step, factorizing the effective matrix on the fly.
pub fn imex_bdf_step(
    sys: &SecondOrderSystem,
    coeffs: &BdfCoefficients,
    hist: &HistoryBuffer,
    dt: f64,
    t_next: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if hist.len() < coeffs.k {
        return Err(Error::InvalidConfig(format!(
            "history holds {} entries, order {} needs {}",
            hist.len(),
            coeffs.k,
            coeffs.k
        )));
    }
    let stepper = ImexBdfStepper::new(sys, coeffs.clone(), dt)?;
    Ok(stepper.step(hist, t_next))
}

/// Result of the auxiliary-variable update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavUpdate {
    pub phi: f64,
    pub clamped: bool,
}

/// Closed-form solution of
/// `(Φ_{n+1} − Φ_n)/Δt = −Φ_{n+1} Θ_im / (Ψ_im + ψ)`,
/// i.e. `Φ_{n+1} = Φ_n / (1 + Δt Θ_im/(Ψ_im + ψ))`.
///
/// A negative `Θ` (forcing or active nonlinearity) can make the denominator
/// small or negative. Growth is capped at `Φ_{n+1} = 2Φ_n`, the per-step
/// envelope of the nonlinear energy estimate, and the step is flagged.
pub fn sav_update(phi_n: f64, psi_im: f64, theta_im: f64, dt: f64, psi: f64) -> SavUpdate {
    let den = 1.0 + dt * theta_im / (psi_im + psi);
    if den.is_nan() {
        return SavUpdate {
            phi: phi_n,
            clamped: true,
        };
    }
    if den < 0.5 {
        return SavUpdate {
            phi: 2.0 * phi_n,
            clamped: true,
        };
    }
    SavUpdate {
        phi: phi_n / den,
        clamped: false,
    }
}

/// `(Ξ, Υ)` with `Ξ = Φ_{n+1}/(Ψ_im + ψ)` and `Υ = 1 − (1 − Ξ)^β`.
pub fn scaling_factor(phi_next: f64, psi_im: f64, psi: f64, beta: u32) -> (f64, f64) {
    let xi = if psi_im.is_finite() {
        phi_next / (psi_im + psi)
    } else {
        0.0
    };
    let upsilon = 1.0 - (1.0 - xi).powi(beta as i32);
    (xi, upsilon)
}

/// Scales both vectors by the same `Υ`.
pub fn apply_update(
    u_im: &DVector<f64>,
    v_im: &DVector<f64>,
    upsilon: f64,
) -> (DVector<f64>, DVector<f64>) {
    (u_im * upsilon, v_im * upsilon)
}

/// Resets `Φ` to `Υ² Ψ_im + ψ` (the pseudo-energy of the updated state plus
/// the floor) once it drops below `ε_tol ψ`.
pub fn recovery_check(
    phi_next: f64,
    upsilon: f64,
    psi_im: f64,
    psi: f64,
    eps_tol: f64,
) -> (f64, bool) {
    if phi_next < eps_tol * psi {
        let energy = if upsilon == 0.0 {
            0.0
        } else {
            upsilon * upsilon * psi_im
        };
        (energy + psi, true)
    } else {
        (phi_next, false)
    }
}
