//! Explicit Runge-Kutta stepping on the first-order form
//! `y = (u, v)`, `y' = (v, M⁻¹(f_ext − C v − K u − f_nl))`.

use nalgebra::DVector;

use crate::linalg::CholeskyFactor;
use crate::system::SecondOrderSystem;

/// Butcher tableau of an explicit method (strictly lower-triangular `a`).
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitTableau {
    pub order: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ExplicitTableau {
    pub fn forward_euler() -> Self {
        Self {
            order: 1,
            a: vec![vec![]],
            b: vec![1.0],
            c: vec![0.0],
        }
    }

    pub fn explicit_midpoint() -> Self {
        Self {
            order: 2,
            a: vec![vec![], vec![0.5]],
            b: vec![0.0, 1.0],
            c: vec![0.0, 0.5],
        }
    }

    /// Kutta's third-order method.
    pub fn kutta3() -> Self {
        Self {
            order: 3,
            a: vec![vec![], vec![0.5], vec![-1.0, 2.0]],
            b: vec![1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 1.0],
        }
    }

    pub fn classical_rk4() -> Self {
        Self {
            order: 4,
            a: vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            b: vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            c: vec![0.0, 0.5, 0.5, 1.0],
        }
    }

    /// The method used for a starting procedure of the given order (1..=4).
    pub fn of_order(order: usize) -> Option<Self> {
        match order {
            1 => Some(Self::forward_euler()),
            2 => Some(Self::explicit_midpoint()),
            3 => Some(Self::kutta3()),
            4 => Some(Self::classical_rk4()),
            _ => None,
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

/// Acceleration from the equation of motion.
pub(crate) fn acceleration(
    sys: &SecondOrderSystem,
    mass: &CholeskyFactor,
    u: &DVector<f64>,
    v: &DVector<f64>,
    t: f64,
) -> DVector<f64> {
    mass.solve(&sys.residual_force(u, v, t))
}

/// One explicit step of size `dt` from `(t, u, v)`. Performs one mass solve per stage.
pub fn rk_step(
    sys: &SecondOrderSystem,
    mass: &CholeskyFactor,
    tableau: &ExplicitTableau,
    t: f64,
    u: &DVector<f64>,
    v: &DVector<f64>,
    dt: f64,
) -> (DVector<f64>, DVector<f64>) {
    let s = tableau.stages();
    let mut ku: Vec<DVector<f64>> = Vec::with_capacity(s);
    let mut kv: Vec<DVector<f64>> = Vec::with_capacity(s);
    for i in 0..s {
        let mut ui = u.clone();
        let mut vi = v.clone();
        for (j, &aij) in tableau.a[i].iter().enumerate() {
            if aij != 0.0 {
                ui.axpy(dt * aij, &ku[j], 1.0);
                vi.axpy(dt * aij, &kv[j], 1.0);
            }
        }
        let ai = acceleration(sys, mass, &ui, &vi, t + tableau.c[i] * dt);
        ku.push(vi);
        kv.push(ai);
    }
    let mut u_next = u.clone();
    let mut v_next = v.clone();
    for i in 0..s {
        let bi = tableau.b[i];
        if bi != 0.0 {
            u_next.axpy(dt * bi, &ku[i], 1.0);
            v_next.axpy(dt * bi, &kv[i], 1.0);
        }
    }
    (u_next, v_next)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableaux_are_consistent() {
        for order in 1..=4 {
            let t = ExplicitTableau::of_order(order).unwrap();
            assert_eq!(t.order, order);
            let sum_b: f64 = t.b.iter().sum();
            assert!((sum_b - 1.0).abs() < 1e-15);
            for (i, row) in t.a.iter().enumerate() {
                let row_sum: f64 = row.iter().sum();
                assert!((row_sum - t.c[i]).abs() < 1e-15);
            }
        }
        assert!(ExplicitTableau::of_order(5).is_none());
    }

    #[test]
    fn free_particle_is_exact() {
        let sys = SecondOrderSystem::sdof(1.0, 0.0, 0.0).unwrap();
        let m = sys.mass_factor().unwrap();
        for order in 1..=4 {
            let tab = ExplicitTableau::of_order(order).unwrap();
            let (u, v) = rk_step(
                &sys,
                &m,
                &tab,
                0.0,
                &DVector::from_element(1, 0.0),
                &DVector::from_element(1, 1.0),
                0.1,
            );
            assert!((u[0] - 0.1).abs() < 1e-16);
            assert_eq!(v[0], 1.0);
        }
    }
}
