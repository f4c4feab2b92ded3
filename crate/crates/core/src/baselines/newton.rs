use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    /// Tolerance on the infinity norm of the residual.
    pub abs_tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-7,
            max_iter: 50,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidConfig(format!(
                "newton needs abs_tol > 0 and max_iter >= 1, got {} and {}",
                self.abs_tol, self.max_iter
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: DVector<f64>,
    /// Number of linear updates performed (each is one linear solve).
    pub iterations: usize,
    pub residual_norm: f64,
}

/// Newton-Raphson on `residual(x) = 0`.
///
/// At least one update is always taken, so a linear residual converges in
/// exactly one iteration. Iteration stops once `‖residual‖_∞ ≤ abs_tol`.
pub fn newton_solve<R, J>(
    residual: R,
    jacobian: J,
    x0: &DVector<f64>,
    cfg: &NewtonConfig,
) -> Result<NewtonOutcome>
where
    R: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    cfg.validate()?;
    let mut x = x0.clone();
    let mut r = residual(&x);
    let mut iterations = 0;
    loop {
        let norm = r.amax();
        if iterations > 0 && norm <= cfg.abs_tol {
            return Ok(NewtonOutcome {
                x,
                iterations,
                residual_norm: norm,
            });
        }
        if iterations >= cfg.max_iter || !norm.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                residual: norm,
            });
        }
        let dx = jacobian(&x).lu().solve(&r).filter(|d| d.iter().all(|v| v.is_finite()));
        let Some(dx) = dx else {
            return Err(Error::NonConvergence {
                iterations,
                residual: norm,
            });
        };
        x -= dx;
        iterations += 1;
        r = residual(&x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn s(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn linear_residual_one_iteration() {
        let out = newton_solve(
            |x| s(x[0] - 3.0),
            |_| DMatrix::from_element(1, 1, 1.0),
            &s(0.0),
            &NewtonConfig::default(),
        )
        .unwrap();
        assert_eq!(out.x[0], 3.0);
        assert_eq!(out.iterations, 1);
    }

    #[test]
    fn cubic_root() {
        let out = newton_solve(
            |x| s(x[0].powi(3) - 8.0),
            |x| DMatrix::from_element(1, 1, 3.0 * x[0] * x[0]),
            &s(3.0),
            &NewtonConfig::default(),
        )
        .unwrap();
        assert!(out.residual_norm <= 1e-7);
        assert_relative_eq!(out.x[0], 2.0, epsilon = 1e-8);
        assert!(out.iterations > 1);
    }

    #[test]
    fn singular_jacobian_fails() {
        let err = newton_solve(
            |x| s(x[0] * 0.0 + 1.0),
            |_| DMatrix::zeros(1, 1),
            &s(0.0),
            &NewtonConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn iteration_cap() {
        let cfg = NewtonConfig {
            abs_tol: 1e-300,
            max_iter: 3,
        };
        let err = newton_solve(
            |x| s(x[0].atan()),
            |x| DMatrix::from_element(1, 1, 1.0 / (1.0 + x[0] * x[0])),
            &s(3.0),
            &cfg,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonConvergence { iterations: 3, .. }));
    }
}
