use nalgebra::{DMatrix, DVector};

use super::{BenchmarkProblem, ReferencePolicy};
use crate::error::{Error, Result};
use crate::linalg;
use crate::system::SecondOrderSystem;

/// Tridiagonal matrix of `n` identical links, the first one tied to ground.
fn chain_matrix(n: usize, coef: f64) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = if i + 1 < n { 2.0 * coef } else { coef };
        if i + 1 < n {
            a[(i, i + 1)] = -coef;
            a[(i + 1, i)] = -coef;
        }
    }
    a
}

/// `N` Duffing oscillators in series (a shear-building analogue).
///
/// DOF `i` is linked to DOF `i − 1` by a damper `c`, a linear spring `k₁` and
/// a cubic spring `k₃`; DOF 1 is linked to ground and DOF `N` is free above.
/// The top DOF carries `cos(ω_p t)`.
pub fn duffing_chain(
    n: usize,
    m: f64,
    c: f64,
    k1: f64,
    k3: f64,
    omega_p: f64,
) -> Result<BenchmarkProblem> {
    if n < 2 {
        return Err(Error::InvalidProblem(format!("chain needs at least 2 DOFs, got {n}")));
    }
    let mass = DMatrix::identity(n, n) * m;
    let damping = chain_matrix(n, c);
    let stiffness = chain_matrix(n, k1);
    let sys = SecondOrderSystem::new(mass, damping, stiffness.clone())?
        .with_nonlinear(move |u, _, _| {
            let mut f = DVector::zeros(n);
            for i in 0..n {
                let below = if i == 0 { 0.0 } else { u[i - 1] };
                f[i] += k3 * (u[i] - below).powi(3);
                if i + 1 < n {
                    f[i] += k3 * (u[i] - u[i + 1]).powi(3);
                }
            }
            f
        })
        .velocity_independent()
        .with_tangent(move |u, _, _| {
            let mut du = DMatrix::zeros(n, n);
            for i in 0..n {
                let below = if i == 0 { 0.0 } else { u[i - 1] };
                let d = 3.0 * k3 * (u[i] - below).powi(2);
                du[(i, i)] += d;
                if i > 0 {
                    du[(i, i - 1)] -= d;
                }
                if i + 1 < n {
                    let d = 3.0 * k3 * (u[i] - u[i + 1]).powi(2);
                    du[(i, i)] += d;
                    du[(i, i + 1)] -= d;
                }
            }
            (du, DMatrix::zeros(n, n))
        })
        .with_external(move |t| {
            let mut f = DVector::zeros(n);
            f[n - 1] = (omega_p * t).cos();
            f
        });

    let mut f_max = DVector::zeros(n);
    f_max[n - 1] = 1.0;
    let u_max = linalg::solve_spd(&linalg::cholesky(&stiffness)?, &f_max) * 2.0;
    let psi_max = 0.5 * linalg::quad_form(&stiffness, &u_max, &u_max);
    Ok(BenchmarkProblem::new(
        "duffing-chain",
        sys,
        DVector::zeros(n),
        DVector::zeros(n),
        50.0,
        psi_max,
        None,
        ReferencePolicy::HighResolutionRun,
        1.0,
    ))
}
