//! Reference solutions on a coarse output grid.
//!
//! Closed-form problems are sampled directly. The others come from a fine RK4
//! run, either stepped so that the fine step divides the output spacing
//! exactly, or stored once and queried by cubic Hermite interpolation
//! ([`DenseReference`]). Two independent schemes (RK4 and Bathe) are compared
//! before a high-resolution reference is trusted.

use nalgebra::DVector;

use crate::baselines::{BaselineScheme, NewtonConfig};
use crate::error::{Error, Result};
use crate::metrics::global_errors;
use crate::problems::{BenchmarkProblem, ReferencePolicy};
use crate::rk::{acceleration, rk_step, ExplicitTableau};
use crate::system::{SecondOrderSystem, State};
use crate::trajectory::{step_count, Trajectory};

/// Fine step used for high-resolution references unless overridden.
pub const DEFAULT_FINE_DT: f64 = 1e-5;

/// Fine step at which RK4 and Bathe agree to [`DEFAULT_CROSS_CHECK_TOL`] for
/// the named benchmark.
pub fn recommended_fine_dt(problem_id: &str) -> f64 {
    match problem_id {
        "duffing" => 1e-6,
        "duffing-chain" => 1e-4,
        _ => DEFAULT_FINE_DT,
    }
}

/// Mutual-difference threshold for the RK4/Bathe cross-check (global norm).
pub const DEFAULT_CROSS_CHECK_TOL: f64 = 1e-8;

/// Number of fine steps per output step: the smallest `m` with `dt / m ≤ fine_dt`.
pub fn substeps(dt: f64, fine_dt: f64) -> usize {
    let m = (dt / fine_dt * (1.0 - 1e-12)).ceil();
    m.max(1.0) as usize
}

/// States of a high-resolution run of `scheme` at `t_n = n·dt`, `n = 0..=n_steps`.
pub fn high_resolution_states(
    problem: &BenchmarkProblem,
    scheme: BaselineScheme,
    dt: f64,
    n_steps: usize,
    fine_dt: f64,
) -> Result<Vec<State>> {
    if !(fine_dt > 0.0 && dt > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "reference steps must be positive (dt = {dt}, fine dt = {fine_dt})"
        )));
    }
    let m = substeps(dt, fine_dt);
    let h = dt / m as f64;
    let newton = NewtonConfig::default();
    let traj = scheme.run_sampled(
        &problem.system,
        h,
        n_steps as f64 * dt,
        &problem.u0,
        &problem.v0,
        &newton,
        m,
    )?;
    if traj.is_divergent() || traj.len() != n_steps + 1 {
        return Err(Error::NonFinite {
            step: traj.divergence.unwrap_or(traj.len()),
        });
    }
    Ok(traj
        .states
        .into_iter()
        .enumerate()
        .map(|(n, mut s)| {
            s.t = n as f64 * dt;
            s
        })
        .collect())
}

/// Outcome of comparing RK4 and Bathe references.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossCheck {
    /// Global-norm differences for u, v, a.
    pub difference: [f64; 3],
    pub threshold: f64,
}

impl CrossCheck {
    pub fn max_difference(&self) -> f64 {
        self.difference.iter().copied().fold(0.0, f64::max)
    }
}

/// Runs RK4 and Bathe at `fine_dt` and compares them on the grid of spacing
/// `dt_out` over the full problem interval. Fails with
/// [`Error::ReferenceMismatch`] when any of the u, v, a differences exceeds `threshold`.
pub fn cross_validate(
    problem: &BenchmarkProblem,
    dt_out: f64,
    fine_dt: f64,
    threshold: f64,
) -> Result<CrossCheck> {
    let n = step_count(problem.t_end, dt_out);
    let rk = high_resolution_states(problem, BaselineScheme::Rk4, dt_out, n, fine_dt)?;
    let bathe = high_resolution_states(problem, BaselineScheme::Bathe(0.5), dt_out, n, fine_dt)?;
    let mut traj = Trajectory::new("bathe", dt_out, bathe.len());
    traj.states = bathe;
    let difference = global_errors(&traj, &rk)?;
    let check = CrossCheck {
        difference,
        threshold,
    };
    let worst = check.max_difference();
    if !(worst <= threshold) {
        return Err(Error::ReferenceMismatch {
            difference: worst,
            threshold,
        });
    }
    Ok(check)
}

/// A fine RK4 run stored in full, queried at arbitrary times.
///
/// Between fine steps the displacement and velocity are cubic Hermite
/// interpolants of `(u, v)` and `(v, a)`; the acceleration is recomputed from
/// the equation of motion. The interpolation error is `O(h⁴)`.
#[derive(Debug, Clone)]
pub struct DenseReference {
    h: f64,
    n_dof: usize,
    /// `u` then `v` for each fine step, flattened.
    data: Vec<f64>,
}

impl DenseReference {
    pub fn rk4(problem: &BenchmarkProblem, fine_dt: f64) -> Result<Self> {
        if !(fine_dt > 0.0) {
            return Err(Error::InvalidConfig(format!("fine dt must be positive, got {fine_dt}")));
        }
        let sys = &problem.system;
        let mass = sys.ensure_valid()?;
        let n = substeps(problem.t_end, fine_dt);
        let h = problem.t_end / n as f64;
        let tab = ExplicitTableau::classical_rk4();
        let d = sys.n_dof();
        let mut data = Vec::with_capacity(2 * d * (n + 1));
        let mut u = problem.u0.clone();
        let mut v = problem.v0.clone();
        data.extend(u.iter().chain(v.iter()));
        for i in 0..n {
            let (un, vn) = rk_step(sys, &mass, &tab, i as f64 * h, &u, &v, h);
            if !un.iter().chain(vn.iter()).all(|x| x.is_finite()) {
                return Err(Error::NonFinite { step: i + 1 });
            }
            data.extend(un.iter().chain(vn.iter()));
            u = un;
            v = vn;
        }
        Ok(Self { h, n_dof: d, data })
    }

    pub fn fine_dt(&self) -> f64 {
        self.h
    }

    pub fn t_end(&self) -> f64 {
        self.h * (self.samples() - 1) as f64
    }

    fn samples(&self) -> usize {
        self.data.len() / (2 * self.n_dof)
    }

    fn sample(&self, i: usize) -> (DVector<f64>, DVector<f64>) {
        let d = self.n_dof;
        let base = 2 * d * i;
        (
            DVector::from_column_slice(&self.data[base..base + d]),
            DVector::from_column_slice(&self.data[base + d..base + 2 * d]),
        )
    }

    /// State at time `t ∈ [0, t_end]`.
    pub fn state_at(&self, sys: &SecondOrderSystem, t: f64) -> Result<State> {
        let last = self.samples() - 1;
        let x = t / self.h;
        if !(x >= -1e-9 && x <= last as f64 + 1e-9) {
            return Err(Error::InvalidConfig(format!(
                "reference queried at t = {t} outside [0, {}]",
                self.t_end()
            )));
        }
        let mass = sys.mass_factor()?;
        let i = (x.floor().max(0.0) as usize).min(last);
        let s = x - i as f64;
        let (u0, v0) = self.sample(i);
        if s.abs() < 1e-9 || i == last {
            let a = acceleration(sys, &mass, &u0, &v0, t);
            return Ok(State { t, u: u0, v: v0, a });
        }
        let (u1, v1) = self.sample(i + 1);
        let ti = i as f64 * self.h;
        let a0 = acceleration(sys, &mass, &u0, &v0, ti);
        let a1 = acceleration(sys, &mass, &u1, &v1, ti + self.h);
        let h00 = 2.0 * s.powi(3) - 3.0 * s * s + 1.0;
        let h10 = s.powi(3) - 2.0 * s * s + s;
        let h01 = -2.0 * s.powi(3) + 3.0 * s * s;
        let h11 = s.powi(3) - s * s;
        let hh = self.h;
        let u = &u0 * h00 + &v0 * (h10 * hh) + &u1 * h01 + &v1 * (h11 * hh);
        let v = &v0 * h00 + &a0 * (h10 * hh) + &v1 * h01 + &a1 * (h11 * hh);
        let a = acceleration(sys, &mass, &u, &v, t);
        Ok(State { t, u, v, a })
    }

    /// States at `t_n = n·dt`, `n = 0..=n_steps`.
    pub fn states_on_grid(&self, sys: &SecondOrderSystem, dt: f64, n_steps: usize) -> Result<Vec<State>> {
        (0..=n_steps).map(|n| self.state_at(sys, n as f64 * dt)).collect()
    }
}

/// Where reference states come from for one problem.
#[derive(Debug, Clone)]
pub enum ReferenceSource {
    Exact,
    Dense(DenseReference),
}

impl ReferenceSource {
    /// The closed form when available, otherwise a dense RK4 run at `fine_dt`.
    pub fn for_problem(problem: &BenchmarkProblem, fine_dt: f64) -> Result<Self> {
        match problem.reference_policy {
            ReferencePolicy::ClosedForm | ReferencePolicy::Quadrature if problem.exact.is_some() => {
                Ok(Self::Exact)
            }
            _ => Ok(Self::Dense(DenseReference::rk4(problem, fine_dt)?)),
        }
    }

    pub fn states(&self, problem: &BenchmarkProblem, dt: f64, n_steps: usize) -> Result<Vec<State>> {
        match self {
            Self::Exact => problem
                .exact_on_grid(dt, n_steps)
                .ok_or_else(|| Error::InvalidProblem(format!("{} has no exact solution", problem.id))),
            Self::Dense(d) => d.states_on_grid(&problem.system, dt, n_steps),
        }
    }
}

/// Reference states on the grid `t_n = n·dt`: the closed form when the problem
/// has one, otherwise a fine RK4 run whose step divides `dt`.
pub fn reference_states(
    problem: &BenchmarkProblem,
    dt: f64,
    n_steps: usize,
    fine_dt: f64,
) -> Result<Vec<State>> {
    match problem.reference_policy {
        ReferencePolicy::ClosedForm | ReferencePolicy::Quadrature if problem.exact.is_some() => problem
            .exact_on_grid(dt, n_steps)
            .ok_or_else(|| Error::InvalidProblem(format!("{} has no exact solution", problem.id))),
        _ => high_resolution_states(problem, BaselineScheme::Rk4, dt, n_steps, fine_dt),
    }
}
