//! Leading local truncation errors of IMEX-BDFk-SAV on the forced damped
//! oscillator `ü + 2ζω₀u̇ + ω₀²u = p₀ sin(ω_f t)`, and the matching one-step
//! measurement from exact history.
//!
//! A step starts at `t_n = 0` from the state `(u₀, v₀)`; the history at
//! `t = −jΔt` is taken from the exact solution through that state. The error
//! is numerical minus exact at `t = Δt`.

use nalgebra::DVector;

use crate::bdf_sav::{BdfCoefficients, HistoryBuffer, ImexBdfStepper, SavRunConfig, SavStepper};
use crate::error::{Error, Result};
use crate::problems::linear_sdof;
use crate::system::{pseudo_energy, SecondOrderSystem};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LteParams {
    pub omega0: f64,
    pub zeta: f64,
    pub u0: f64,
    pub v0: f64,
    pub p0: f64,
    pub omega_f: f64,
}

impl LteParams {
    pub fn new(omega0: f64, zeta: f64, u0: f64, v0: f64, p0: f64, omega_f: f64) -> Result<Self> {
        let p = Self {
            omega0,
            zeta,
            u0,
            v0,
            p0,
            omega_f,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0 && self.omega0.is_finite()) {
            return Err(Error::InvalidConfig(format!("omega0 must be positive, got {}", self.omega0)));
        }
        if !(0.0..1.0).contains(&self.zeta) {
            return Err(Error::InvalidConfig(format!("zeta must lie in [0, 1), got {}", self.zeta)));
        }
        if ![self.u0, self.v0, self.p0, self.omega_f].iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidConfig("non-finite LTE parameter".into()));
        }
        Ok(())
    }

    /// `κ = v₀/(ω₀u₀)`; undefined for `u₀ = 0`.
    pub fn kappa(&self) -> Option<f64> {
        (self.u0 != 0.0).then(|| self.v0 / (self.omega0 * self.u0))
    }
}

/// `1 / ((k + 1) H_k)`: 1/2, 2/9, 3/22, 12/125, 10/137.
pub fn error_constant(k: usize) -> Result<f64> {
    let c = BdfCoefficients::new(k)?;
    Ok(1.0 / ((k + 1) as f64 * c.harmonic))
}

/// Coefficients of `Δt^{k+1}` in `(τ_u, τ_v)`.
///
/// The products `u₀κ = v₀/ω₀` and `v₀/κ = ω₀u₀` are expanded, so the
/// formulas stay defined when `u₀ = 0`.
///
/// For `k = 5` the forcing part of `τ_u` is `+(10/137) p₀ω_f · 2ω₀ζ(2ω₀²(1 − 2ζ²) + ω_f²)`.
/// With the opposite sign the coefficient no longer equals
/// `error_constant(5) · u⁽⁶⁾(0)` and disagrees with measured one-step errors
/// whenever `ζ p₀ ≠ 0`; every other entry already has that form.
pub fn lte_leading_term(k: usize, p: &LteParams) -> Result<(f64, f64)> {
    p.validate()?;
    let (w, z, u0, v0, p0, wf) = (p.omega0, p.zeta, p.u0, p.v0, p.p0, p.omega_f);
    // u₀κ and v₀/κ
    let uk = v0 / w;
    let vk = w * u0;
    let z2 = z * z;
    let z4 = z2 * z2;
    let pw = p0 * wf;
    let (scale, hom_u, hom_v, force, f_u, f_v) = match k {
        1 => (
            -w.powi(2) / 2.0,
            u0 + 2.0 * z * uk,
            v0 * (1.0 - 4.0 * z2) - 2.0 * z * vk,
            0.5,
            0.0,
            1.0,
        ),
        2 => (
            -2.0 * w.powi(3) / 9.0,
            -2.0 * z * u0 + (1.0 - 4.0 * z2) * uk,
            -4.0 * z * (1.0 - 2.0 * z2) * v0 - (1.0 - 4.0 * z2) * vk,
            2.0 / 9.0,
            1.0,
            -2.0 * w * z,
        ),
        3 => (
            3.0 * w.powi(4) / 22.0,
            (1.0 - 4.0 * z2) * u0 + 4.0 * z * (1.0 - 2.0 * z2) * uk,
            (1.0 - 12.0 * z2 + 16.0 * z4) * v0 - 4.0 * z * (1.0 - 2.0 * z2) * vk,
            -3.0 / 22.0,
            2.0 * w * z,
            w * w * (1.0 - 4.0 * z2) + wf * wf,
        ),
        4 => (
            12.0 * w.powi(5) / 125.0,
            -4.0 * z * (1.0 - 2.0 * z2) * u0 + (1.0 - 12.0 * z2 + 16.0 * z4) * uk,
            -2.0 * z * (3.0 - 16.0 * z2 + 16.0 * z4) * v0 - (1.0 - 12.0 * z2 + 16.0 * z4) * vk,
            -12.0 / 125.0,
            w * w * (1.0 - 4.0 * z2) + wf * wf,
            -2.0 * w * z * (2.0 * w * w * (1.0 - 2.0 * z2) + wf * wf),
        ),
        5 => (
            -10.0 * w.powi(6) / 137.0,
            (1.0 - 12.0 * z2 + 16.0 * z4) * u0 + 2.0 * z * (3.0 - 16.0 * z2 + 16.0 * z4) * uk,
            (1.0 - 24.0 * z2 + 80.0 * z4 - 64.0 * z4 * z2) * v0
                - 2.0 * z * (3.0 - 16.0 * z2 + 16.0 * z4) * vk,
            10.0 / 137.0,
            2.0 * w * z * (2.0 * w * w * (1.0 - 2.0 * z2) + wf * wf),
            w.powi(4) * (1.0 - 12.0 * z2 + 16.0 * z4)
                + w * w * wf * wf * (1.0 - 4.0 * z2)
                + wf.powi(4),
        ),
        _ => return Err(Error::UnsupportedOrder(k)),
    };
    Ok((
        scale * hom_u + force * pw * f_u,
        scale * hom_v + force * pw * f_v,
    ))
}

fn oscillator(p: &LteParams) -> Result<(SecondOrderSystem, impl Fn(f64) -> (f64, f64))> {
    let prob = linear_sdof(p.zeta, p.omega0, p.p0, p.omega_f, p.u0, p.v0)?;
    let exact = prob
        .exact
        .clone()
        .ok_or_else(|| Error::InvalidProblem("linear oscillator without closed form".into()))?;
    Ok((prob.system, move |t: f64| {
        let (u, v) = exact(t);
        (u[0], v[0])
    }))
}

fn exact_history(
    k: usize,
    dt: f64,
    exact: &impl Fn(f64) -> (f64, f64),
) -> HistoryBuffer {
    HistoryBuffer::from_newest_first(
        (0..k)
            .map(|j| {
                let (u, v) = exact(-(j as f64) * dt);
                (DVector::from_element(1, u), DVector::from_element(1, v))
            })
            .collect(),
    )
}

/// One IMEX-BDFk-SAV step on the SDOF `sys` from exact history, with
/// `Φ_n = Ψ(u₀, v₀) + ψ`. Returns `(u₁ − u(Δt), v₁ − u̇(Δt))`.
pub fn one_step_error(
    sys: &SecondOrderSystem,
    k: usize,
    dt: f64,
    psi: f64,
    exact: impl Fn(f64) -> (f64, f64),
) -> Result<(f64, f64)> {
    if sys.n_dof() != 1 {
        return Err(Error::InvalidConfig("one-step error is defined for SDOF systems".into()));
    }
    let cfg = SavRunConfig::new(k, dt, psi, dt)?;
    let stepper = SavStepper::new(sys, &cfg)?;
    let hist = exact_history(k, dt, &exact);
    let (u0, v0) = hist.get(0).expect("k >= 1");
    let phi = pseudo_energy(sys, u0, v0) + psi;
    let (u, v, _) = stepper.advance(&hist, phi, dt)?;
    let (ue, ve) = exact(dt);
    Ok((u[0] - ue, v[0] - ve))
}

/// [`one_step_error`] for the oscillator described by `p`.
pub fn measured_one_step_error(p: &LteParams, k: usize, dt: f64, psi: f64) -> Result<(f64, f64)> {
    let (sys, exact) = oscillator(p)?;
    one_step_error(&sys, k, dt, psi, exact)
}

/// `max(|u_sav − u_bdf|, |v_sav − v_bdf|)` after one step from exact history:
/// the part of the one-step error due to the auxiliary-variable scaling.
///
/// Evaluated as `|1 − Ξ|^β · max(|u_im|, |v_im|)` from the step's own `Ξ`,
/// which equals the difference of the two states without cancelling two
/// nearly equal numbers.
pub fn sav_contribution(p: &LteParams, k: usize, dt: f64, psi: f64) -> Result<f64> {
    let (sys, exact) = oscillator(p)?;
    let hist = exact_history(k, dt, &exact);
    let plain = ImexBdfStepper::new(&sys, BdfCoefficients::new(k)?, dt)?;
    let (ub, vb) = plain.step(&hist, dt);
    let cfg = SavRunConfig::new(k, dt, psi, dt)?;
    let stepper = SavStepper::new(&sys, &cfg)?;
    let (u0, v0) = hist.get(0).expect("k >= 1");
    let phi = pseudo_energy(&sys, u0, v0) + psi;
    let (_, _, d) = stepper.advance(&hist, phi, dt)?;
    Ok((1.0 - d.xi).abs().powi(cfg.beta as i32) * ub[0].abs().max(vb[0].abs()))
}

/// Default step window `(lo, hi)` for fitting the slope of [`sav_contribution`].
pub fn default_sav_window(_k: usize) -> (f64, f64) {
    (1e-3, 1e-2)
}

/// Log-log slope of [`sav_contribution`] over `count` steps in `[lo, hi]`.
pub fn sav_contribution_slope(
    p: &LteParams,
    k: usize,
    psi: f64,
    lo: f64,
    hi: f64,
    count: usize,
) -> Result<f64> {
    let dts = crate::metrics::log_space(lo, hi, count);
    let d = dts
        .iter()
        .map(|&dt| sav_contribution(p, k, dt, psi))
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::metrics::convergence_slope(&dts, &d)?.slope)
}

/// Least-squares fit of `τ(Δt) = a Δt^p + b Δt^{p+1}`; returns `(a, b)`.
pub fn richardson_fit(dts: &[f64], taus: &[f64], p: i32) -> Result<(f64, f64)> {
    if dts.len() != taus.len() || dts.len() < 2 {
        return Err(Error::InvalidConfig("Richardson fit needs at least two matching samples".into()));
    }
    // Normal equations on the scaled unknowns (a, b·h_ref) for conditioning.
    let h_ref = dts.iter().copied().fold(0.0, f64::max);
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&h, &tau) in dts.iter().zip(taus) {
        let x1 = h.powi(p);
        let x2 = x1 * h / h_ref;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        r1 += x1 * tau;
        r2 += x2 * tau;
    }
    let det = s11 * s22 - s12 * s12;
    if !(det.abs() > 0.0) {
        return Err(Error::InvalidConfig("degenerate Richardson fit".into()));
    }
    let a = (r1 * s22 - r2 * s12) / det;
    let b = (s11 * r2 - s12 * r1) / det / h_ref;
    Ok((a, b))
}

/// Predicted versus fitted leading coefficients for one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LteComparison {
    pub k: usize,
    pub predicted: (f64, f64),
    pub measured: (f64, f64),
}

impl LteComparison {
    /// `measured / predicted` for `τ_u` and `τ_v`.
    pub fn ratios(&self) -> (f64, f64) {
        (
            self.measured.0 / self.predicted.0,
            self.measured.1 / self.predicted.1,
        )
    }

    /// Both ratios within `tol` of 1 (sign included).
    pub fn agrees(&self, tol: f64) -> bool {
        let (ru, rv) = self.ratios();
        (ru - 1.0).abs() <= tol && (rv - 1.0).abs() <= tol
    }
}

/// Default largest step of the three-level fit, in periods `2π/ω₀`. Higher
/// orders need larger steps to keep `τ ~ Δt^{k+1}` above round-off.
pub fn default_fit_step(k: usize) -> f64 {
    match k {
        1 => 1e-3,
        2 => 2e-3,
        3 => 4e-3,
        4 => 8e-3,
        _ => 1.6e-2,
    }
}

/// Fits the leading coefficients from one-step errors at `dt0`, `dt0/2`, `dt0/4`.
pub fn compare_leading_term(p: &LteParams, k: usize, dt0: f64, psi: f64) -> Result<LteComparison> {
    let predicted = lte_leading_term(k, p)?;
    let dts = [dt0, dt0 / 2.0, dt0 / 4.0];
    let mut tu = Vec::with_capacity(3);
    let mut tv = Vec::with_capacity(3);
    for &dt in &dts {
        let (a, b) = measured_one_step_error(p, k, dt, psi)?;
        tu.push(a);
        tv.push(b);
    }
    let order = k as i32 + 1;
    let (mu, _) = richardson_fit(&dts, &tu, order)?;
    let (mv, _) = richardson_fit(&dts, &tv, order)?;
    Ok(LteComparison {
        k,
        predicted,
        measured: (mu, mv),
    })
}
