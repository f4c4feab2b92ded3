//! The semi-discrete equation of motion
//!
//! ```text
//! M ü + C u̇ + K u + f_nl(u, u̇, t) = f_ext(t)
//! ```
//!
//! with `M` symmetric positive definite and `C`, `K` symmetric positive
//! semi-definite. Physics that would make `C` or `K` indefinite (negative
//! damping in Van der Pol, softening springs) must be moved into `f_nl`;
//! the library rejects indefinite linear parts instead of projecting them.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, CholeskyFactor};

pub type NonlinearFn =
    Arc<dyn Fn(&DVector<f64>, &DVector<f64>, f64) -> DVector<f64> + Send + Sync>;
/// Returns `(∂f_nl/∂u, ∂f_nl/∂v)`.
pub type TangentFn =
    Arc<dyn Fn(&DVector<f64>, &DVector<f64>, f64) -> (DMatrix<f64>, DMatrix<f64>) + Send + Sync>;
pub type ExternalFn = Arc<dyn Fn(f64) -> DVector<f64> + Send + Sync>;

/// Mass, damping and stiffness plus the nonlinear and external force callbacks.
///
/// Immutable once built; clones share the callbacks.
#[derive(Clone)]
pub struct SecondOrderSystem {
    mass: DMatrix<f64>,
    damping: DMatrix<f64>,
    stiffness: DMatrix<f64>,
    nonlinear: Option<NonlinearFn>,
    tangent: Option<TangentFn>,
    external: Option<ExternalFn>,
    velocity_dependent: bool,
}

impl fmt::Debug for SecondOrderSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SecondOrderSystem")
            .field("n_dof", &self.n_dof())
            .field("mass", &self.mass)
            .field("damping", &self.damping)
            .field("stiffness", &self.stiffness)
            .field("nonlinear", &self.nonlinear.is_some())
            .field("external", &self.external.is_some())
            .finish()
    }
}

fn check_square(what: &'static str, a: &DMatrix<f64>, n: usize) -> Result<()> {
    if a.nrows() != n {
        return Err(Error::Dimension {
            what,
            expected: n,
            found: a.nrows(),
        });
    }
    if a.ncols() != n {
        return Err(Error::Dimension {
            what,
            expected: n,
            found: a.ncols(),
        });
    }
    Ok(())
}

fn checked_symmetric(what: &'static str, a: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let asym = linalg::relative_asymmetry(&a);
    if asym > linalg::TOL_SYM {
        return Err(Error::NotSymmetric {
            matrix: what,
            asymmetry: asym,
        });
    }
    Ok(linalg::symmetrize(&a))
}

impl SecondOrderSystem {
    /// Builds a linear, unforced system. Matrices must be square, of equal
    /// size and symmetric to within [`linalg::TOL_SYM`]; they are stored
    /// symmetrized. Definiteness is checked by [`validate_system`].
    pub fn new(mass: DMatrix<f64>, damping: DMatrix<f64>, stiffness: DMatrix<f64>) -> Result<Self> {
        let n = mass.nrows();
        if n == 0 {
            return Err(Error::InvalidSystem("system has no degrees of freedom".into()));
        }
        check_square("mass", &mass, n)?;
        check_square("damping", &damping, n)?;
        check_square("stiffness", &stiffness, n)?;
        Ok(Self {
            mass: checked_symmetric("mass", mass)?,
            damping: checked_symmetric("damping", damping)?,
            stiffness: checked_symmetric("stiffness", stiffness)?,
            nonlinear: None,
            tangent: None,
            external: None,
            velocity_dependent: false,
        })
    }

    /// Single degree of freedom `m ü + c u̇ + k u = …`.
    pub fn sdof(m: f64, c: f64, k: f64) -> Result<Self> {
        Self::new(
            DMatrix::from_element(1, 1, m),
            DMatrix::from_element(1, 1, c),
            DMatrix::from_element(1, 1, k),
        )
    }

    /// Sets the nonlinear internal force. It is assumed to depend on the
    /// velocity unless [`Self::velocity_independent`] is called afterwards.
    pub fn with_nonlinear<F>(mut self, f: F) -> Self
    where
        F: Fn(&DVector<f64>, &DVector<f64>, f64) -> DVector<f64> + Send + Sync + 'static,
    {
        self.nonlinear = Some(Arc::new(f));
        self.velocity_dependent = true;
        self
    }

    /// Analytic tangent of the nonlinear force; finite differences are used otherwise.
    pub fn with_tangent<F>(mut self, f: F) -> Self
    where
        F: Fn(&DVector<f64>, &DVector<f64>, f64) -> (DMatrix<f64>, DMatrix<f64>)
            + Send
            + Sync
            + 'static,
    {
        self.tangent = Some(Arc::new(f));
        self
    }

    pub fn with_external<F>(mut self, f: F) -> Self
    where
        F: Fn(f64) -> DVector<f64> + Send + Sync + 'static,
    {
        self.external = Some(Arc::new(f));
        self
    }

    /// Declares that `f_nl` does not read the velocity argument.
    pub fn velocity_independent(mut self) -> Self {
        self.velocity_dependent = false;
        self
    }

    /// Drops the external force (used for the unforced stability variants).
    pub fn unforced(mut self) -> Self {
        self.external = None;
        self
    }

    pub fn n_dof(&self) -> usize {
        self.mass.nrows()
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn damping(&self) -> &DMatrix<f64> {
        &self.damping
    }

    pub fn stiffness(&self) -> &DMatrix<f64> {
        &self.stiffness
    }

    pub fn has_nonlinear(&self) -> bool {
        self.nonlinear.is_some()
    }

    pub fn has_external(&self) -> bool {
        self.external.is_some()
    }

    pub fn nonlinear_depends_on_velocity(&self) -> bool {
        self.nonlinear.is_some() && self.velocity_dependent
    }

    pub fn nonlinear_force(&self, u: &DVector<f64>, v: &DVector<f64>, t: f64) -> DVector<f64> {
        match &self.nonlinear {
            Some(f) => f(u, v, t),
            None => DVector::zeros(self.n_dof()),
        }
    }

    pub fn external_force(&self, t: f64) -> DVector<f64> {
        match &self.external {
            Some(f) => f(t),
            None => DVector::zeros(self.n_dof()),
        }
    }

    /// `(∂f_nl/∂u, ∂f_nl/∂v)`, analytic when provided, otherwise central
    /// differences with step `max(1e-7, 1e-7·|x_i|)`.
    pub fn nonlinear_tangent(
        &self,
        u: &DVector<f64>,
        v: &DVector<f64>,
        t: f64,
    ) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.n_dof();
        let Some(f) = &self.nonlinear else {
            return (DMatrix::zeros(n, n), DMatrix::zeros(n, n));
        };
        if let Some(tan) = &self.tangent {
            return tan(u, v, t);
        }
        let mut du = DMatrix::zeros(n, n);
        let mut dv = DMatrix::zeros(n, n);
        let mut up = u.clone();
        for j in 0..n {
            let h = (1e-7 * u[j].abs()).max(1e-7);
            up[j] = u[j] + h;
            let fp = f(&up, v, t);
            up[j] = u[j] - h;
            let fm = f(&up, v, t);
            up[j] = u[j];
            du.set_column(j, &((fp - fm) / (2.0 * h)));
        }
        if self.velocity_dependent {
            let mut vp = v.clone();
            for j in 0..n {
                let h = (1e-7 * v[j].abs()).max(1e-7);
                vp[j] = v[j] + h;
                let fp = f(u, &vp, t);
                vp[j] = v[j] - h;
                let fm = f(u, &vp, t);
                vp[j] = v[j];
                dv.set_column(j, &((fp - fm) / (2.0 * h)));
            }
        }
        (du, dv)
    }

    /// `f_ext − C v − K u − f_nl(u, v, t)`, the right-hand side of `M a = …`.
    pub fn residual_force(&self, u: &DVector<f64>, v: &DVector<f64>, t: f64) -> DVector<f64> {
        let mut r = self.external_force(t);
        r -= &self.damping * v;
        r -= &self.stiffness * u;
        if self.nonlinear.is_some() {
            r -= self.nonlinear_force(u, v, t);
        }
        r
    }

    /// Cholesky factor of the mass matrix, failing if `M` is not positive definite.
    pub fn mass_factor(&self) -> Result<CholeskyFactor> {
        linalg::cholesky(&self.mass)
    }

    /// Runs [`validate_system`] and converts any failure into an error.
    pub fn ensure_valid(&self) -> Result<CholeskyFactor> {
        let report = validate_system(self);
        if !report.is_valid() {
            return Err(Error::InvalidSystem(report.to_string()));
        }
        self.mass_factor()
    }

    pub(crate) fn check_vector(&self, what: &'static str, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.n_dof() {
            return Err(Error::Dimension {
                what,
                expected: self.n_dof(),
                found: x.len(),
            });
        }
        Ok(())
    }
}

/// Kinematic snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub a: DVector<f64>,
}

impl State {
    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(self.v.iter()).chain(self.a.iter()).all(|x| x.is_finite())
    }
}

/// Auxiliary variable `Φ` with its floor `ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SavState {
    pub phi: f64,
    pub psi: f64,
}

/// Pass/fail per matrix as produced by [`validate_system`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationReport {
    pub mass_positive_definite: bool,
    pub damping_positive_semidefinite: bool,
    pub stiffness_positive_semidefinite: bool,
    pub nonlinear_finite_at_rest: bool,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.mass_positive_definite
            && self.damping_positive_semidefinite
            && self.stiffness_positive_semidefinite
            && self.nonlinear_finite_at_rest
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = |ok: bool| if ok { "ok" } else { "FAIL" };
        write!(
            f,
            "M positive definite: {}; C positive semi-definite: {}; K positive semi-definite: {}; f_nl finite at rest: {}",
            tag(self.mass_positive_definite),
            tag(self.damping_positive_semidefinite),
            tag(self.stiffness_positive_semidefinite),
            tag(self.nonlinear_finite_at_rest),
        )
    }
}

/// Checks definiteness of `M`, `C`, `K` and that `f_nl(0, 0, 0)` is finite.
pub fn validate_system(sys: &SecondOrderSystem) -> ValidationReport {
    let zero = DVector::zeros(sys.n_dof());
    ValidationReport {
        mass_positive_definite: sys.mass_factor().is_ok(),
        damping_positive_semidefinite: linalg::is_positive_semidefinite(sys.damping()),
        stiffness_positive_semidefinite: linalg::is_positive_semidefinite(sys.stiffness()),
        nonlinear_finite_at_rest: sys
            .nonlinear_force(&zero, &zero, 0.0)
            .iter()
            .all(|x| x.is_finite()),
    }
}

/// Quadratic form of a positive semi-definite matrix, floored at zero.
/// Round-off can make `xᵀAx` slightly negative when `x` lies near the null space of `A`.
fn psd_form(a: &nalgebra::DMatrix<f64>, x: &DVector<f64>) -> f64 {
    linalg::quad_form(a, x, x).max(0.0)
}

/// `Ψ = ½ vᵀMv + ½ uᵀKu`.
pub fn pseudo_energy(sys: &SecondOrderSystem, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    0.5 * psd_form(sys.mass(), v) + 0.5 * psd_form(sys.stiffness(), u)
}

/// `Θ = vᵀ(C v − f_ext(t) + f_nl(u, v, t))`, the dissipation rate of `Ψ`.
pub fn theta(sys: &SecondOrderSystem, u: &DVector<f64>, v: &DVector<f64>, t: f64) -> f64 {
    let mut th = psd_form(sys.damping(), v);
    if sys.has_external() {
        th -= v.dot(&sys.external_force(t));
    }
    if sys.has_nonlinear() {
        th += v.dot(&sys.nonlinear_force(u, v, t));
    }
    th
}

/// Consistent initial acceleration from the equation of motion.
pub fn initial_acceleration(
    sys: &SecondOrderSystem,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    t0: f64,
) -> Result<DVector<f64>> {
    sys.check_vector("u0", u0)?;
    sys.check_vector("v0", v0)?;
    let factor = sys.mass_factor()?;
    Ok(factor.solve(&sys.residual_force(u0, v0, t0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v1(x: f64) -> DVector<f64> {
        DVector::from_element(1, x)
    }

    #[test]
    fn trivial_system_validates() {
        let sys = SecondOrderSystem::new(
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0])),
        )
        .unwrap();
        assert!(validate_system(&sys).is_valid());
    }

    #[test]
    fn indefinite_mass_fails() {
        let sys = SecondOrderSystem::new(
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0])),
            DMatrix::zeros(2, 2),
            DMatrix::zeros(2, 2),
        )
        .unwrap();
        let report = validate_system(&sys);
        assert!(!report.mass_positive_definite);
        assert!(report.stiffness_positive_semidefinite);
        assert!(sys.ensure_valid().is_err());
    }

    #[test]
    fn negative_damping_fails() {
        let sys = SecondOrderSystem::sdof(1.0, -0.1, 1.0).unwrap();
        assert!(!validate_system(&sys).damping_positive_semidefinite);
    }

    #[test]
    fn structural_errors() {
        let err = SecondOrderSystem::new(
            DMatrix::identity(2, 2),
            DMatrix::zeros(3, 3),
            DMatrix::zeros(2, 2),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Dimension { what: "damping", .. }));
        let err = SecondOrderSystem::new(
            DMatrix::identity(2, 2),
            DMatrix::zeros(2, 2),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NotSymmetric { matrix: "stiffness", .. }));
    }

    #[test]
    fn pseudo_energy_examples() {
        let sys = SecondOrderSystem::sdof(2.0, 0.0, 3.0).unwrap();
        assert_eq!(pseudo_energy(&sys, &v1(0.0), &v1(0.0)), 0.0);
        assert_relative_eq!(pseudo_energy(&sys, &v1(1.0), &v1(1.0)), 2.5);
        let pend = SecondOrderSystem::sdof(1.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(pseudo_energy(&pend, &v1(0.0), &v1(1.95)), 1.90125);
    }

    #[test]
    fn theta_examples() {
        let cons = SecondOrderSystem::sdof(1.0, 0.0, 4.0).unwrap();
        assert_eq!(theta(&cons, &v1(0.3), &v1(-2.0), 0.7), 0.0);
        let mu = 2.0;
        let vdp = SecondOrderSystem::sdof(1.0, 0.0, 1.0)
            .unwrap()
            .with_nonlinear(move |u, v, _| {
                DVector::from_element(1, -mu * (1.0 - u[0] * u[0]) * v[0])
            });
        assert_relative_eq!(theta(&vdp, &v1(2.0), &v1(1.0), 0.0), 6.0);
    }

    #[test]
    fn initial_acceleration_examples() {
        let sys = SecondOrderSystem::sdof(1.0, 0.0, 4.0).unwrap();
        assert_relative_eq!(initial_acceleration(&sys, &v1(1.0), &v1(0.0), 0.0).unwrap()[0], -4.0);
        let w = 2.0 * std::f64::consts::PI;
        let forced = SecondOrderSystem::sdof(1.0, 2.0 * 0.2 * w, w * w)
            .unwrap()
            .with_external(move |t| DVector::from_element(1, (2.0 * w * t).sin()));
        assert_eq!(initial_acceleration(&forced, &v1(0.0), &v1(0.0), 0.0).unwrap()[0], 0.0);
    }

    #[test]
    fn finite_difference_tangent_matches_analytic() {
        let k3 = 20.0;
        let sys = SecondOrderSystem::sdof(1.0, 1.0, 1.0)
            .unwrap()
            .with_nonlinear(move |u, _v, _| u.map(|x| k3 * x * x * x))
            .velocity_independent();
        let (du, dv) = sys.nonlinear_tangent(&v1(1.5), &v1(0.0), 0.0);
        assert_relative_eq!(du[(0, 0)], 3.0 * k3 * 1.5 * 1.5, max_relative = 1e-7);
        assert_eq!(dv[(0, 0)], 0.0);
    }
}
