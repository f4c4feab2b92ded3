//! Comparison integrators: Newmark trapezoidal rule, generalized-α, Bathe,
//! central difference (standard and Park–Underwood), classical RK4, and the
//! plain IMEX-BDF scheme.
//!
//! All runs start from the consistent acceleration `a_0` and flag divergence
//! (a non-finite or overflowing state) by truncating the trajectory.

mod explicit;
mod implicit;
mod newton;

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

pub use crate::bdf_sav::integrate_imex_bdf;
pub use explicit::{integrate_central_difference, integrate_rk4, CentralDifferenceVariant};
pub use implicit::{
    generalized_alpha_parameters, integrate_bathe, integrate_generalized_alpha, integrate_newmark_tr,
};
pub use newton::{newton_solve, NewtonConfig, NewtonOutcome};

use crate::error::{Error, Result};
use crate::rk::acceleration;
use crate::system::{SecondOrderSystem, State};
use crate::trajectory::{diverged, step_count, CostStats, Trajectory};

pub(crate) struct StepOutput {
    pub u: DVector<f64>,
    pub v: DVector<f64>,
    pub a: DVector<f64>,
}

/// Shared one-step driver. `step` maps the state at `t_n` to the one at `t_{n+1}`.
/// Only every `stride`-th state is recorded; `t_end` is rounded to whole strides.
pub(crate) fn drive(
    sys: &SecondOrderSystem,
    scheme: &str,
    dt: f64,
    t_end: f64,
    u0: &DVector<f64>,
    v0: &DVector<f64>,
    stride: usize,
    mut step: impl FnMut(&State, &mut CostStats) -> Result<StepOutput>,
) -> Result<Trajectory> {
    let mass = sys.ensure_valid()?;
    sys.check_vector("u0", u0)?;
    sys.check_vector("v0", v0)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidConfig(format!("t_end must be non-negative, got {t_end}")));
    }
    if stride == 0 {
        return Err(Error::InvalidConfig("recording stride must be at least 1".into()));
    }
    let n_out = step_count(t_end, dt * stride as f64);
    let n_steps = n_out * stride;
    let mut traj = Trajectory::new(scheme, dt * stride as f64, n_out + 1);
    let a0 = acceleration(sys, &mass, u0, v0, 0.0);
    traj.stats.startup_solves += 1;
    let mut current = State {
        t: 0.0,
        u: u0.clone(),
        v: v0.clone(),
        a: a0,
    };
    traj.states.push(current.clone());
    for n in 0..n_steps {
        let out = step(&current, &mut traj.stats).map_err(|e| match e {
            Error::NonConvergence { .. } => Error::StepFailed {
                step: n + 1,
                source: Box::new(e),
            },
            other => other,
        })?;
        if diverged(&out.u, &out.v) || !out.a.iter().all(|x| x.is_finite()) {
            traj.divergence = Some((n + 1).div_ceil(stride));
            break;
        }
        current = State {
            t: (n + 1) as f64 * dt,
            u: out.u,
            v: out.v,
            a: out.a,
        };
        if (n + 1) % stride == 0 {
            traj.states.push(current.clone());
        }
    }
    Ok(traj)
}

/// A comparison scheme with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaselineScheme {
    ImexBdf(usize),
    NewmarkTr,
    GeneralizedAlpha(f64),
    Bathe(f64),
    CentralDifference,
    CdParkUnderwood,
    Rk4,
}

impl BaselineScheme {
    /// Implicit solves (or explicit stages) per step. Comparative runs use
    /// `n_sub · Δt` so that every scheme spends the same number of solves.
    pub fn n_sub(&self) -> usize {
        match self {
            Self::Bathe(_) => 2,
            Self::Rk4 => 4,
            _ => 1,
        }
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self, Self::NewmarkTr | Self::GeneralizedAlpha(_) | Self::Bathe(_))
    }

    pub fn run(
        &self,
        sys: &SecondOrderSystem,
        dt: f64,
        t_end: f64,
        u0: &DVector<f64>,
        v0: &DVector<f64>,
        newton: &NewtonConfig,
    ) -> Result<Trajectory> {
        self.run_sampled(sys, dt, t_end, u0, v0, newton, 1)
    }

    /// Runs with step `dt` but records only every `stride`-th state, so the
    /// returned trajectory lives on the grid of spacing `stride · dt`.
    /// Plain IMEX-BDF does not support striding.
    #[allow(clippy::too_many_arguments)]
    pub fn run_sampled(
        &self,
        sys: &SecondOrderSystem,
        dt: f64,
        t_end: f64,
        u0: &DVector<f64>,
        v0: &DVector<f64>,
        newton: &NewtonConfig,
        stride: usize,
    ) -> Result<Trajectory> {
        match *self {
            Self::ImexBdf(_) if stride != 1 => Err(Error::InvalidConfig(
                "recording stride is not supported for IMEX-BDF".into(),
            )),
            Self::ImexBdf(k) => integrate_imex_bdf(sys, k, dt, t_end, u0, v0),
            Self::NewmarkTr => implicit::newmark_tr(sys, dt, t_end, u0, v0, newton, stride),
            Self::GeneralizedAlpha(rho) => {
                implicit::generalized_alpha(sys, rho, dt, t_end, u0, v0, newton, stride)
            }
            Self::Bathe(gamma) => implicit::bathe(sys, gamma, dt, t_end, u0, v0, newton, stride),
            Self::CentralDifference => explicit::central_difference(
                sys,
                dt,
                t_end,
                u0,
                v0,
                CentralDifferenceVariant::Standard,
                stride,
            ),
            Self::CdParkUnderwood => explicit::central_difference(
                sys,
                dt,
                t_end,
                u0,
                v0,
                CentralDifferenceVariant::ParkUnderwood,
                stride,
            ),
            Self::Rk4 => explicit::rk4(sys, dt, t_end, u0, v0, stride),
        }
    }
}

impl fmt::Display for BaselineScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::ImexBdf(k) => write!(f, "imex-bdf{k}"),
            Self::NewmarkTr => write!(f, "tr"),
            Self::GeneralizedAlpha(rho) => write!(f, "generalized-alpha({rho})"),
            Self::Bathe(gamma) => write!(f, "bathe({gamma})"),
            Self::CentralDifference => write!(f, "cd"),
            Self::CdParkUnderwood => write!(f, "cd-pu"),
            Self::Rk4 => write!(f, "rk4"),
        }
    }
}

fn parse_param(s: &str, name: &str, default: f64) -> Result<f64> {
    let rest = &s[name.len()..];
    if rest.is_empty() {
        return Ok(default);
    }
    let inner = rest
        .strip_prefix('(')
        .and_then(|r| r.strip_suffix(')'))
        .or_else(|| rest.strip_prefix(':'))
        .ok_or_else(|| Error::InvalidConfig(format!("malformed scheme parameter in '{s}'")))?;
    inner
        .trim()
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad number in scheme '{s}'")))
}

/// Accepts `imex-bdf<k>`, `tr`, `generalized-alpha[(ρ∞)]` (default 0), `ga`,
/// `bathe[(γ)]` (default 0.5), `cd`, `cd-pu`, `rk4`.
impl FromStr for BaselineScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase().replace('_', "-");
        if let Some(k) = s.strip_prefix("imex-bdf") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad BDF order in '{s}'")))?;
            if !(1..=5).contains(&k) {
                return Err(Error::UnsupportedOrder(k));
            }
            return Ok(Self::ImexBdf(k));
        }
        for name in ["generalized-alpha", "ga"] {
            if s.starts_with(name) && (s.len() == name.len() || !s.as_bytes()[name.len()].is_ascii_alphabetic()) {
                return Ok(Self::GeneralizedAlpha(parse_param(&s, name, 0.0)?));
            }
        }
        if s.starts_with("bathe") {
            return Ok(Self::Bathe(parse_param(&s, "bathe", 0.5)?));
        }
        match s.as_str() {
            "tr" | "newmark-tr" | "trapezoidal" => Ok(Self::NewmarkTr),
            "cd" | "central-difference" => Ok(Self::CentralDifference),
            "cd-pu" | "cd-park-underwood" => Ok(Self::CdParkUnderwood),
            "rk4" => Ok(Self::Rk4),
            _ => Err(Error::InvalidConfig(format!("unknown scheme '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::linear_sdof;

    #[test]
    fn n_sub_values() {
        assert_eq!(BaselineScheme::Bathe(0.5).n_sub(), 2);
        assert_eq!(BaselineScheme::Rk4.n_sub(), 4);
        assert_eq!(BaselineScheme::NewmarkTr.n_sub(), 1);
        assert_eq!(BaselineScheme::ImexBdf(3).n_sub(), 1);
        assert_eq!(BaselineScheme::CdParkUnderwood.n_sub(), 1);
    }

    #[test]
    fn parse_round_trip() {
        for s in [
            BaselineScheme::ImexBdf(4),
            BaselineScheme::NewmarkTr,
            BaselineScheme::GeneralizedAlpha(0.0),
            BaselineScheme::GeneralizedAlpha(0.8),
            BaselineScheme::Bathe(0.5),
            BaselineScheme::CentralDifference,
            BaselineScheme::CdParkUnderwood,
            BaselineScheme::Rk4,
        ] {
            assert_eq!(s.to_string().parse::<BaselineScheme>().unwrap(), s);
        }
        assert_eq!("ga".parse::<BaselineScheme>().unwrap(), BaselineScheme::GeneralizedAlpha(0.0));
        assert_eq!("bathe".parse::<BaselineScheme>().unwrap(), BaselineScheme::Bathe(0.5));
        assert!("imex-bdf6".parse::<BaselineScheme>().is_err());
        assert!("leapfrog".parse::<BaselineScheme>().is_err());
    }

    #[test]
    fn linear_problems_take_one_newton_iteration() {
        let p = linear_sdof(0.2, 6.0, 1.0, 4.0, 0.3, 0.0).unwrap();
        let newton = NewtonConfig::default();
        for s in [BaselineScheme::NewmarkTr, BaselineScheme::GeneralizedAlpha(0.0), BaselineScheme::Bathe(0.5)] {
            let tr = s.run(&p.system, 0.01, 1.0, &p.u0, &p.v0, &newton).unwrap();
            assert_eq!(tr.stats.average_newton_iterations(), 1.0, "{s}");
            assert_eq!(tr.stats.linear_solves, 100 * s.n_sub(), "{s}");
        }
    }

    #[test]
    fn cost_parity() {
        let p = linear_sdof(0.0, 6.0, 0.0, 1.0, 1.0, 0.0).unwrap();
        let newton = NewtonConfig::default();
        let base = BaselineScheme::NewmarkTr.run(&p.system, 0.01, 2.0, &p.u0, &p.v0, &newton).unwrap();
        for s in [BaselineScheme::Bathe(0.5), BaselineScheme::Rk4] {
            let dt = 0.01 * s.n_sub() as f64;
            let tr = s.run(&p.system, dt, 2.0, &p.u0, &p.v0, &newton).unwrap();
            assert_eq!(tr.stats.linear_solves, base.stats.linear_solves, "{s}");
        }
    }
}
