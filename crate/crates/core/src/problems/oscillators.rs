use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{BenchmarkProblem, ExactFn, ReferencePolicy};
use crate::error::{Error, Result};
use crate::system::SecondOrderSystem;

fn v1(x: f64) -> DVector<f64> {
    DVector::from_element(1, x)
}

/// Damped SDOF `ü + 2ζω₀u̇ + ω₀²u = p₀ sin(ω_f t)` with its closed-form solution.
pub fn linear_sdof(
    zeta: f64,
    omega0: f64,
    p0: f64,
    omega_f: f64,
    u0: f64,
    v0: f64,
) -> Result<BenchmarkProblem> {
    if !(omega0 > 0.0) {
        return Err(Error::InvalidProblem(format!("omega0 must be positive, got {omega0}")));
    }
    if !(0.0..1.0).contains(&zeta) {
        return Err(Error::InvalidProblem(format!("zeta must lie in [0, 1), got {zeta}")));
    }
    let eta = (omega0 * omega0 - omega_f * omega_f).powi(2) + (2.0 * zeta * omega0 * omega_f).powi(2);
    if p0 != 0.0 && eta == 0.0 {
        return Err(Error::InvalidProblem(
            "undamped resonant forcing has no bounded closed form".into(),
        ));
    }
    let sys = SecondOrderSystem::sdof(1.0, 2.0 * zeta * omega0, omega0 * omega0)?
        .with_external(move |t| DVector::from_element(1, p0 * (omega_f * t).sin()));

    let exact: ExactFn = Arc::new(linear_sdof_exact(zeta, omega0, p0, omega_f, u0, v0));
    let u_max = u0.abs() + 2.0 * p0.abs() / (omega0 * omega0);
    let psi_max = 0.5 * v0 * v0 + 0.5 * omega0 * omega0 * u_max * u_max;
    Ok(BenchmarkProblem::new(
        "linear-sdof",
        sys,
        v1(u0),
        v1(v0),
        10.0 * 2.0 * std::f64::consts::PI / omega0,
        psi_max,
        Some(exact),
        ReferencePolicy::ClosedForm,
        2.0 * std::f64::consts::PI / omega0,
    ))
}

/// Closed-form displacement and velocity of the forced damped SDOF.
pub(crate) fn linear_sdof_exact(
    zeta: f64,
    omega0: f64,
    p0: f64,
    omega_f: f64,
    u0: f64,
    v0: f64,
) -> impl Fn(f64) -> (DVector<f64>, DVector<f64>) + Send + Sync + 'static {
    let eta = (omega0 * omega0 - omega_f * omega_f).powi(2) + (2.0 * zeta * omega0 * omega_f).powi(2);
    let q = if p0 == 0.0 { 0.0 } else { p0 / eta };
    let wd = omega0 * (1.0 - zeta * zeta).sqrt();
    let decay = zeta * omega0;
    let a_f = u0 + 2.0 * q * zeta * omega0 * omega_f;
    let b_f = (v0 + decay * u0) / wd
        + q * omega_f / wd * (omega_f * omega_f - omega0 * omega0 + 2.0 * zeta * zeta * omega0 * omega0);
    let s1 = omega0 * omega0 - omega_f * omega_f;
    let s2 = 2.0 * omega0 * omega_f * zeta;
    move |t: f64| {
        let e = (-decay * t).exp();
        let (sd, cd) = (wd * t).sin_cos();
        let (sf, cf) = (omega_f * t).sin_cos();
        let u = e * (a_f * cd + b_f * sd) + q * (s1 * sf - s2 * cf);
        let v = e * ((-decay * a_f + wd * b_f) * cd + (-decay * b_f - wd * a_f) * sd)
            + q * omega_f * (s1 * cf + s2 * sf);
        (v1(u), v1(v))
    }
}

/// Approximate Van der Pol limit cycle: the upper branch `v̆(ŭ)`.
pub fn van_der_pol_limit_cycle(mu: f64, u: f64) -> Option<f64> {
    let r3 = 3.0_f64.sqrt();
    if u <= -r3 || u >= r3 {
        return None;
    }
    let root = (3.0 - u * u).sqrt();
    if u < -1.0 {
        Some(root)
    } else {
        Some(root + mu * (-u * u * u / 3.0 + u + 2.0 / 3.0))
    }
}

/// Unforced Van der Pol oscillator `ü + k₁u − μ(1 − u²)u̇ = 0` (unit mass).
///
/// The destabilizing `−μu̇` term lives in the nonlinear force so that `C`
/// stays positive semi-definite.
pub fn van_der_pol(mu: f64, k1: f64, u0: f64, v0: f64) -> BenchmarkProblem {
    let sys = SecondOrderSystem::new(
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::zeros(1, 1),
        DMatrix::from_element(1, 1, k1),
    )
    .expect("scalar matrices are valid")
    .with_nonlinear(move |u, v, _| DVector::from_element(1, -mu * (1.0 - u[0] * u[0]) * v[0]))
    .with_tangent(move |u, v, _| {
        (
            DMatrix::from_element(1, 1, 2.0 * mu * u[0] * v[0]),
            DMatrix::from_element(1, 1, -mu * (1.0 - u[0] * u[0])),
        )
    });

    let r3 = 3.0_f64.sqrt();
    let n = 200_000;
    let psi_max = (1..n)
        .filter_map(|i| {
            let u = -r3 + 2.0 * r3 * i as f64 / n as f64;
            van_der_pol_limit_cycle(mu, u).map(|v| 0.5 * v * v + 0.5 * k1 * u * u)
        })
        .fold(0.0, f64::max);
    BenchmarkProblem::new(
        "van-der-pol",
        sys,
        v1(u0),
        v1(v0),
        15.0,
        psi_max,
        None,
        ReferencePolicy::HighResolutionRun,
        1.0,
    )
}

/// Duffing oscillator `mü + cu̇ + k₁u + k₃u³ = p₀ cos(ω_p t)`.
#[allow(clippy::too_many_arguments)]
pub fn duffing_sdof(
    m: f64,
    c: f64,
    k1: f64,
    k3: f64,
    p0: f64,
    omega_p: f64,
    u0: f64,
    v0: f64,
) -> BenchmarkProblem {
    let sys = SecondOrderSystem::sdof(m, c, k1)
        .expect("positive mass")
        .with_nonlinear(move |u, _, _| DVector::from_element(1, k3 * u[0].powi(3)))
        .velocity_independent()
        .with_tangent(move |u, _, _| {
            (
                DMatrix::from_element(1, 1, 3.0 * k3 * u[0] * u[0]),
                DMatrix::zeros(1, 1),
            )
        })
        .with_external(move |t| DVector::from_element(1, p0 * (omega_p * t).cos()));
    let u_max = u0 + 2.0 * p0 / k1;
    let psi_max = 0.5 * m * v0 * v0 + 0.5 * k1 * u_max * u_max;
    BenchmarkProblem::new(
        "duffing",
        sys,
        v1(u0),
        v1(v0),
        1.0,
        psi_max,
        None,
        ReferencePolicy::HighResolutionRun,
        1.0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn default_linear_setup() {
        let p = linear_sdof(0.2, 2.0 * PI, 1.0, 4.0 * PI, 0.0, 0.0).unwrap();
        assert_relative_eq!(p.psi_max_estimate, 0.05, epsilon = 1e-3);
        assert_relative_eq!(p.period, 1.0, epsilon = 1e-15);
        assert_eq!(p.t_end, 10.0);
        let s = p.exact_state(0.0).unwrap();
        assert!(s.u[0].abs() < 1e-15 && s.v[0].abs() < 1e-15);
        assert!(s.a[0].abs() < 1e-15);
    }

    #[test]
    fn undamped_free_vibration_is_cosine() {
        let w = 2.0 * PI;
        let p = linear_sdof(0.0, w, 0.0, 1.0, 1.0, 0.0).unwrap();
        let ex = p.exact.clone().unwrap();
        for i in 0..50 {
            let t = i as f64 * 0.037;
            let (u, v) = ex(t);
            assert_relative_eq!(u[0], (w * t).cos(), epsilon = 1e-13);
            assert_relative_eq!(v[0], -w * (w * t).sin(), epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(linear_sdof(0.0, 1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(linear_sdof(1.0, 1.0, 1.0, 2.0, 0.0, 0.0).is_err());
        assert!(linear_sdof(0.1, 0.0, 1.0, 2.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn exact_solution_satisfies_equation() {
        let (z, w0, p0, wf) = (0.2, 2.0 * PI, 1.0, 4.0 * PI);
        let ex = linear_sdof_exact(z, w0, p0, wf, 0.3, -1.0);
        let h = 1e-5;
        for i in 0..40 {
            let t = 0.1 + i as f64 * 0.173;
            let (u, v) = ex(t);
            let (_, vp) = ex(t + h);
            let (_, vm) = ex(t - h);
            let a = (vp[0] - vm[0]) / (2.0 * h);
            let (up, _) = ex(t + h);
            let (um, _) = ex(t - h);
            assert_relative_eq!((up[0] - um[0]) / (2.0 * h), v[0], epsilon = 1e-7);
            let res = a + 2.0 * z * w0 * v[0] + w0 * w0 * u[0] - p0 * (wf * t).sin();
            assert!(res.abs() < 1e-6, "residual {res} at {t}");
        }
    }

    #[test]
    fn van_der_pol_estimate() {
        let p = van_der_pol(2.0, 1.0, 2.0, 0.0);
        assert_relative_eq!(p.psi_max_estimate, 8.9, epsilon = 0.05);
        assert_eq!(van_der_pol_limit_cycle(2.0, -3.0_f64.sqrt()), None);
        assert!(van_der_pol_limit_cycle(2.0, -3.0_f64.sqrt() + 1e-12).unwrap() < 1e-5);
        let f = p.system.nonlinear_force(&v1(2.0), &v1(1.0), 0.0);
        assert_eq!(f[0], 6.0);
    }

    #[test]
    fn duffing_estimate_and_force() {
        let p = duffing_sdof(1.0, 1.0, 1.0, 20.0, 500.0, 2.0 * PI, 5.0, -10.0);
        assert_relative_eq!(p.psi_max_estimate, 5e5, max_relative = 0.02);
        assert_eq!(p.system.nonlinear_force(&v1(2.0), &v1(0.0), 0.0)[0], 160.0);
        assert!(!p.system.nonlinear_depends_on_velocity());
    }
}
