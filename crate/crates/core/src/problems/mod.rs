//! Benchmark problems with their energy estimates and reference data.

mod chain;
mod oscillators;
mod pendulum;

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::system::{SecondOrderSystem, State};

pub use chain::duffing_chain;
pub use oscillators::{duffing_sdof, linear_sdof, van_der_pol, van_der_pol_limit_cycle};
pub use pendulum::{simple_pendulum, spring_pendulum, PendulumSolution};

/// Closed-form `(u, v)` at time `t`.
pub type ExactFn = Arc<dyn Fn(f64) -> (DVector<f64>, DVector<f64>) + Send + Sync>;

/// How a problem's reference trajectory is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferencePolicy {
    ClosedForm,
    Quadrature,
    HighResolutionRun,
}

#[derive(Clone)]
pub struct BenchmarkProblem {
    pub id: &'static str,
    pub system: SecondOrderSystem,
    pub u0: DVector<f64>,
    pub v0: DVector<f64>,
    pub t_end: f64,
    pub psi_max_estimate: f64,
    /// Always `100 · psi_max_estimate`.
    pub psi_recommended: f64,
    pub exact: Option<ExactFn>,
    pub reference_policy: ReferencePolicy,
    /// Characteristic period used to express step sizes (`Δt / T`).
    pub period: f64,
}

impl fmt::Debug for BenchmarkProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkProblem")
            .field("id", &self.id)
            .field("n_dof", &self.system.n_dof())
            .field("t_end", &self.t_end)
            .field("psi_max_estimate", &self.psi_max_estimate)
            .field("reference_policy", &self.reference_policy)
            .field("period", &self.period)
            .finish()
    }
}

impl BenchmarkProblem {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        id: &'static str,
        system: SecondOrderSystem,
        u0: DVector<f64>,
        v0: DVector<f64>,
        t_end: f64,
        psi_max_estimate: f64,
        exact: Option<ExactFn>,
        reference_policy: ReferencePolicy,
        period: f64,
    ) -> Self {
        Self {
            id,
            system,
            u0,
            v0,
            t_end,
            psi_max_estimate,
            psi_recommended: 100.0 * psi_max_estimate,
            exact,
            reference_policy,
            period,
        }
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    /// Exact state with the acceleration taken from the equation of motion.
    pub fn exact_state(&self, t: f64) -> Option<State> {
        let exact = self.exact.as_ref()?;
        let (u, v) = exact(t);
        let m = self.system.mass_factor().ok()?;
        let a = m.solve(&self.system.residual_force(&u, &v, t));
        Some(State { t, u, v, a })
    }

    /// Ranges (max − min over all DOFs) of the exact u, v, a on `[0, t_end]`,
    /// sampled at `samples + 1` points.
    pub fn exact_ranges(&self, samples: usize) -> Option<[f64; 3]> {
        self.exact.as_ref()?;
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for i in 0..=samples {
            let s = self.exact_state(self.t_end * i as f64 / samples as f64)?;
            for (j, z) in [&s.u, &s.v, &s.a].into_iter().enumerate() {
                for &x in z.iter() {
                    lo[j] = lo[j].min(x);
                    hi[j] = hi[j].max(x);
                }
            }
        }
        Some([hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]])
    }

    /// Exact states at `t_n = n·dt`, `n = 0..=n_steps`.
    pub fn exact_on_grid(&self, dt: f64, n_steps: usize) -> Option<Vec<State>> {
        (0..=n_steps)
            .map(|n| self.exact_state(n as f64 * dt))
            .collect()
    }
}

/// Identifiers accepted by [`problem_by_id`].
pub const PROBLEM_IDS: [&str; 6] = [
    "linear-sdof",
    "van-der-pol",
    "duffing",
    "pendulum",
    "spring-pendulum",
    "duffing-chain",
];

/// Constructor parameters of a problem and their standard values.
pub fn default_params(id: &str) -> Result<Vec<(&'static str, f64)>> {
    use std::f64::consts::PI;
    let w0 = 2.0 * PI;
    Ok(match id {
        "linear-sdof" => vec![
            ("zeta", 0.2),
            ("omega0", w0),
            ("p0", 1.0),
            ("omega_f", 2.0 * w0),
            ("u0", 0.0),
            ("v0", 0.0),
        ],
        "van-der-pol" => vec![("mu", 2.0), ("k1", 1.0), ("u0", 2.0), ("v0", 0.0)],
        "duffing" => vec![
            ("m", 1.0),
            ("c", 1.0),
            ("k1", 1.0),
            ("k3", 20.0),
            ("p0", 500.0),
            ("omega_p", w0),
            ("u0", 5.0),
            ("v0", -10.0),
        ],
        "pendulum" => vec![("g_over_l", 1.0), ("theta0", 0.0), ("v0", 1.95)],
        "spring-pendulum" => vec![("m", 1.0), ("k", 98.1), ("l0", 0.5), ("g", 9.81)],
        "duffing-chain" => vec![
            ("n", 20.0),
            ("m", 1.0),
            ("c", 0.3),
            ("k1", 1.0),
            ("k3", 10.0),
            ("omega_p", 1.0),
        ],
        other => {
            return Err(Error::InvalidProblem(format!(
                "unknown problem '{other}', expected one of {}",
                PROBLEM_IDS.join(", ")
            )))
        }
    })
}

/// A benchmark with its standard parameters, some of them replaced by
/// `overrides`. The extra key `unforced` (non-zero) removes the external force.
pub fn problem_with_params(id: &str, overrides: &[(String, f64)]) -> Result<BenchmarkProblem> {
    let mut params = default_params(id)?;
    let mut unforced = false;
    for (key, value) in overrides {
        let key = key.replace('-', "_");
        if key == "unforced" {
            unforced = *value != 0.0;
            continue;
        }
        match params.iter_mut().find(|(name, _)| *name == key) {
            Some(slot) => slot.1 = *value,
            None => {
                let known: Vec<&str> = params.iter().map(|(n, _)| *n).collect();
                return Err(Error::InvalidProblem(format!(
                    "unknown parameter '{key}' for {id}, expected one of {}, unforced",
                    known.join(", ")
                )));
            }
        }
    }
    let p = |i: usize| params[i].1;
    let mut problem = match id {
        "linear-sdof" => linear_sdof(p(0), p(1), p(2), p(3), p(4), p(5))?,
        "van-der-pol" => van_der_pol(p(0), p(1), p(2), p(3)),
        "duffing" => duffing_sdof(p(0), p(1), p(2), p(3), p(4), p(5), p(6), p(7)),
        "pendulum" => simple_pendulum(p(0), p(1), p(2))?.0,
        "spring-pendulum" => spring_pendulum(p(0), p(1), p(2), p(3)),
        "duffing-chain" => {
            let n = p(0);
            if n.fract() != 0.0 || n < 0.0 {
                return Err(Error::InvalidProblem(format!("chain size must be a whole number, got {n}")));
            }
            duffing_chain(n as usize, p(1), p(2), p(3), p(4), p(5))?
        }
        _ => unreachable!("default_params rejected the id"),
    };
    if unforced {
        problem.system = problem.system.clone().unforced();
        problem.exact = None;
        problem.reference_policy = ReferencePolicy::HighResolutionRun;
    }
    Ok(problem)
}

/// A benchmark with its standard parameters.
pub fn problem_by_id(id: &str) -> Result<BenchmarkProblem> {
    problem_with_params(id, &[])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::validate_system;

    #[test]
    fn registry_builds_valid_problems() {
        for id in PROBLEM_IDS {
            let p = problem_by_id(id).unwrap();
            assert_eq!(p.id, id);
            assert!(validate_system(&p.system).is_valid(), "{id}");
            assert_eq!(p.psi_recommended, 100.0 * p.psi_max_estimate);
        }
        assert!(problem_by_id("nope").is_err());
    }

    #[test]
    fn overrides_replace_named_parameters() {
        let p = problem_with_params("van-der-pol", &[("u0".into(), 1.5)]).unwrap();
        assert_eq!(p.u0[0], 1.5);
        let err = problem_with_params("van-der-pol", &[("zeta".into(), 0.1)]).unwrap_err();
        assert!(err.to_string().contains("mu"));
        let chain = problem_with_params("duffing-chain", &[("n".into(), 4.0)]).unwrap();
        assert_eq!(chain.system.n_dof(), 4);
        assert!(problem_with_params("duffing-chain", &[("n".into(), 2.5)]).is_err());
    }
}
