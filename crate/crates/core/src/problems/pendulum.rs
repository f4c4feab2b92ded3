use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{BenchmarkProblem, ExactFn, ReferencePolicy};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;
use crate::system::SecondOrderSystem;

const QUAD_TOL: f64 = 1e-12;

/// Exact motion of the simple pendulum `θ̈ + ω² sin θ = 0` below the separatrix.
///
/// With `sin(θ/2) = k sin φ` and `k² = sin²(θ₀/2) + (θ̇₀/2ω)²`, the phase obeys
/// `φ̇ = ω √(1 − k² sin²φ)`, so `ω t = F(φ) − F(φ₀)` with `F` the incomplete
/// elliptic integral of the first kind, and `θ̇ = 2ωk cos φ`. `F` is evaluated
/// by adaptive quadrature on the first quarter period and extended by its
/// symmetries; the relation is inverted by safeguarded Newton on a bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct PendulumSolution {
    pub omega: f64,
    pub modulus: f64,
    /// Complete integral `K(k)`.
    pub quarter: f64,
    phase0: f64,
    offset: f64,
}

impl PendulumSolution {
    pub fn new(g_over_l: f64, theta0: f64, v0: f64) -> Result<Self> {
        if !(g_over_l > 0.0) {
            return Err(Error::InvalidProblem(format!("g/L must be positive, got {g_over_l}")));
        }
        let omega = g_over_l.sqrt();
        let s0 = (0.5 * theta0).sin();
        let k2 = s0 * s0 + (v0 / (2.0 * omega)).powi(2);
        let k = k2.sqrt();
        if !(k < 1.0) || (0.5 * theta0).cos() <= 0.0 {
            return Err(Error::InvalidProblem(
                "pendulum energy reaches the separatrix; motion is not oscillatory".into(),
            ));
        }
        if k == 0.0 {
            return Err(Error::InvalidProblem("pendulum at rest has no oscillation".into()));
        }
        let r = (s0 / k).clamp(-1.0, 1.0).asin();
        let phase0 = if v0 >= 0.0 { r } else { PI - r };
        let mut sol = Self {
            omega,
            modulus: k,
            quarter: 0.0,
            phase0,
            offset: 0.0,
        };
        sol.quarter = sol.f_reduced(FRAC_PI_2);
        sol.offset = sol.f(phase0);
        Ok(sol)
    }

    fn integrand(&self, p: f64) -> f64 {
        1.0 / (1.0 - (self.modulus * p.sin()).powi(2)).sqrt()
    }

    /// `F(r)` for `r ∈ [0, π/2]`.
    fn f_reduced(&self, r: f64) -> f64 {
        adaptive_simpson(|p| self.integrand(p), 0.0, r, QUAD_TOL)
    }

    /// `F(φ)` on the whole real line.
    pub fn f(&self, phi: f64) -> f64 {
        let m = (phi / PI).round();
        let r = phi - m * PI;
        let fr = self.f_reduced(r.abs());
        2.0 * m * self.quarter + fr.copysign(r)
    }

    /// Solves `F(φ) = target`.
    fn invert(&self, target: f64) -> f64 {
        let m = (target / (2.0 * self.quarter)).round();
        let rem = target - 2.0 * m * self.quarter;
        let goal = rem.abs().min(self.quarter);
        let (mut lo, mut hi) = (0.0, FRAC_PI_2);
        let mut r = goal / self.quarter * FRAC_PI_2;
        for _ in 0..100 {
            let g = self.f_reduced(r) - goal;
            if g.abs() < 1e-14 {
                break;
            }
            if g > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let step = r - g / self.integrand(r);
            r = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-15 {
                break;
            }
        }
        m * PI + r.copysign(rem)
    }

    pub fn period(&self) -> f64 {
        4.0 * self.quarter / self.omega
    }

    pub fn amplitude(&self) -> f64 {
        2.0 * self.modulus.asin()
    }

    /// `(θ, θ̇)` at time `t`.
    pub fn state(&self, t: f64) -> (f64, f64) {
        let phi = self.invert(self.omega * t + self.offset);
        let (s, c) = phi.sin_cos();
        (
            2.0 * (self.modulus * s).asin(),
            2.0 * self.omega * self.modulus * c,
        )
    }

    /// Time at which the phase reaches `phi` (no reduction, so `phi` past the
    /// starting phase gives positive times).
    pub fn time_of_phase(&self, phi: f64) -> f64 {
        (self.f(phi) - self.offset) / self.omega
    }

    /// First time after `t = 0` at which `θ` attains its maximum.
    pub fn first_peak_time(&self) -> f64 {
        let mut phi = FRAC_PI_2;
        while phi < self.phase0 {
            phi += 2.0 * PI;
        }
        self.time_of_phase(phi)
    }
}

/// Simple pendulum `θ̈ + (g/L) sin θ = 0`, written with `M = 1`, `C = K = 0`
/// and the whole restoring moment as the nonlinear force.
pub fn simple_pendulum(
    g_over_l: f64,
    theta0: f64,
    v0: f64,
) -> Result<(BenchmarkProblem, PendulumSolution)> {
    let sol = PendulumSolution::new(g_over_l, theta0, v0)?;
    let sys = SecondOrderSystem::new(
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::zeros(1, 1),
        DMatrix::zeros(1, 1),
    )?
    .with_nonlinear(move |u, _, _| DVector::from_element(1, g_over_l * u[0].sin()))
    .velocity_independent()
    .with_tangent(move |u, _, _| {
        (
            DMatrix::from_element(1, 1, g_over_l * u[0].cos()),
            DMatrix::zeros(1, 1),
        )
    });
    let shared = sol.clone();
    let exact: ExactFn = Arc::new(move |t| {
        let (th, w) = shared.state(t);
        (DVector::from_element(1, th), DVector::from_element(1, w))
    });
    // kinetic energy at the bottom of the swing
    let psi_max = 2.0 * g_over_l * sol.modulus * sol.modulus;
    let period = sol.period();
    let problem = BenchmarkProblem::new(
        "pendulum",
        sys,
        DVector::from_element(1, theta0),
        DVector::from_element(1, v0),
        2.0 * period,
        psi_max,
        Some(exact),
        ReferencePolicy::Quadrature,
        period,
    );
    Ok((problem, sol))
}

/// Manufactured radial/angular motion `x = θ = 0.1 sin(2πt)` and its derivatives.
fn manufactured(t: f64) -> (f64, f64, f64) {
    let w = 2.0 * PI;
    let (s, c) = (w * t).sin_cos();
    (0.1 * s, 0.1 * w * c, -0.1 * w * w * s)
}

/// Elastic spring pendulum in radial/angular coordinates `(x, θ)`.
///
/// ```text
/// ẍ + (k/m) x − (L₀ + x) θ̇² − g cos θ = f_x
/// θ̈ + (2ẋθ̇ + g sin θ)/(L₀ + x)      = f_θ
/// ```
///
/// The forcing is chosen so that `x(t) = θ(t) = 0.1 sin(2πt)` solves the
/// system exactly: with `s, ṡ, s̈` the manufactured signal and its derivatives,
/// `f_x = s̈ + (k/m)s − (L₀ + s)ṡ² − g cos s` and
/// `f_θ = s̈ + (2ṡ² + g sin s)/(L₀ + s)`. Lengths `L₀ + x ≤ 0` make the
/// nonlinear force non-finite.
pub fn spring_pendulum(m: f64, k: f64, l0: f64, g: f64) -> BenchmarkProblem {
    let km = k / m;
    let sys = SecondOrderSystem::new(
        DMatrix::identity(2, 2),
        DMatrix::zeros(2, 2),
        DMatrix::from_diagonal(&DVector::from_vec(vec![km, 0.0])),
    )
    .expect("diagonal matrices are valid")
    .with_nonlinear(move |u, v, _| {
        let len = l0 + u[0];
        if len <= 0.0 {
            return DVector::from_element(2, f64::NAN);
        }
        DVector::from_vec(vec![
            -len * v[1] * v[1] - g * u[1].cos(),
            (2.0 * v[0] * v[1] + g * u[1].sin()) / len,
        ])
    })
    .with_tangent(move |u, v, _| {
        let len = l0 + u[0];
        let num = 2.0 * v[0] * v[1] + g * u[1].sin();
        let du = DMatrix::from_row_slice(
            2,
            2,
            &[
                -v[1] * v[1],
                g * u[1].sin(),
                -num / (len * len),
                g * u[1].cos() / len,
            ],
        );
        let dv = DMatrix::from_row_slice(
            2,
            2,
            &[0.0, -2.0 * len * v[1], 2.0 * v[1] / len, 2.0 * v[0] / len],
        );
        (du, dv)
    })
    .with_external(move |t| {
        let (s, sd, sdd) = manufactured(t);
        DVector::from_vec(vec![
            sdd + km * s - (l0 + s) * sd * sd - g * s.cos(),
            sdd + (2.0 * sd * sd + g * s.sin()) / (l0 + s),
        ])
    });
    let exact: ExactFn = Arc::new(|t| {
        let (s, sd, _) = manufactured(t);
        (DVector::from_element(2, s), DVector::from_element(2, sd))
    });
    let n = 10_000;
    let psi_max = (0..=n)
        .map(|i| {
            let (s, sd, _) = manufactured(i as f64 / n as f64);
            sd * sd + 0.5 * km * s * s
        })
        .fold(0.0, f64::max);
    BenchmarkProblem::new(
        "spring-pendulum",
        sys,
        DVector::zeros(2),
        DVector::from_element(2, manufactured(0.0).1),
        2.0,
        psi_max,
        Some(exact),
        ReferencePolicy::ClosedForm,
        1.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn default_pendulum_constants() {
        let (p, sol) = simple_pendulum(1.0, 0.0, 1.95).unwrap();
        assert_relative_eq!(sol.amplitude(), 2.6934, epsilon = 5e-5);
        assert_relative_eq!(sol.period(), 11.6576, epsilon = 5e-4);
        assert_relative_eq!(p.psi_max_estimate, 0.5 * 1.95 * 1.95, epsilon = 1e-12);
        assert_relative_eq!(sol.first_peak_time(), sol.period() / 4.0, epsilon = 1e-12);
    }

    #[test]
    fn small_amplitude_period() {
        let sol = PendulumSolution::new(1.0, 1e-4, 0.0).unwrap();
        assert_relative_eq!(sol.period(), 2.0 * PI, max_relative = 1e-6);
    }

    #[test]
    fn separatrix_rejected() {
        assert!(PendulumSolution::new(1.0, 0.0, 2.0).is_err());
        assert!(PendulumSolution::new(1.0, 0.0, 2.5).is_err());
    }

    #[test]
    fn exact_state_is_periodic_and_energy_conserving() {
        let sol = PendulumSolution::new(1.0, 0.3, -1.2).unwrap();
        let e0 = 0.5 * 1.2 * 1.2 - 0.3_f64.cos();
        let (th0, w0) = sol.state(0.0);
        assert_relative_eq!(th0, 0.3, epsilon = 1e-12);
        assert_relative_eq!(w0, -1.2, epsilon = 1e-12);
        for i in 0..60 {
            let t = i as f64 * 0.731;
            let (th, w) = sol.state(t);
            assert_relative_eq!(0.5 * w * w - th.cos(), e0, epsilon = 1e-11);
            let (th2, w2) = sol.state(t + sol.period());
            assert_relative_eq!(th, th2, epsilon = 1e-10);
            assert_relative_eq!(w, w2, epsilon = 1e-10);
        }
    }

    #[test]
    fn spring_pendulum_manufactured_solution_has_zero_residual() {
        let p = spring_pendulum(1.0, 98.1, 0.5, 9.81);
        assert_relative_eq!(p.psi_max_estimate, 0.49, epsilon = 1e-3);
        let m = p.system.mass_factor().unwrap();
        for i in 0..1000 {
            let t = 2.0 * i as f64 / 999.0;
            let s = p.exact_state(t).unwrap();
            let (_, _, sdd) = manufactured(t);
            let a = m.solve(&p.system.residual_force(&s.u, &s.v, t));
            assert!((a[0] - sdd).abs() < 1e-12 && (a[1] - sdd).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn spring_pendulum_collapse_is_non_finite() {
        let p = spring_pendulum(1.0, 98.1, 0.5, 9.81);
        let f = p.system.nonlinear_force(
            &DVector::from_vec(vec![-0.6, 0.0]),
            &DVector::zeros(2),
            0.0,
        );
        assert!(f.iter().all(|x| x.is_nan()));
    }
}
