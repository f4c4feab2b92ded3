//! Integrator output.

use nalgebra::DVector;

use crate::system::{pseudo_energy, SecondOrderSystem, State};

/// Per-step quantities of the auxiliary-variable update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDiagnostics {
    /// `Ξ = Φ_{n+1} / (Ψ_im + ψ)`.
    pub xi: f64,
    /// `Υ = 1 − (1 − Ξ)^β`.
    pub upsilon: f64,
    /// `Φ_{n+1}` after any recovery.
    pub phi: f64,
    pub psi_im: f64,
    pub theta_im: f64,
    pub recovery_triggered: bool,
    /// The growth cap `Φ_{n+1} ≤ 2Φ_n` replaced the raw update.
    pub clamped: bool,
}

/// History of the auxiliary variable for one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SavHistory {
    /// Step index at which `Φ` is first defined (`k − 1`).
    pub first_step: usize,
    /// `phi[i]` is `Φ` at step `first_step + i`.
    pub phi: Vec<f64>,
    /// `diagnostics[i]` belongs to step `first_step + 1 + i`.
    pub diagnostics: Vec<StepDiagnostics>,
}

impl SavHistory {
    pub fn recovery_steps(&self) -> Vec<usize> {
        self.step_indices(|d| d.recovery_triggered)
    }

    pub fn clamp_steps(&self) -> Vec<usize> {
        self.step_indices(|d| d.clamped)
    }

    fn step_indices(&self, pred: impl Fn(&StepDiagnostics) -> bool) -> Vec<usize> {
        self.diagnostics
            .iter()
            .enumerate()
            .filter(|(_, d)| pred(d))
            .map(|(i, _)| self.first_step + 1 + i)
            .collect()
    }

    /// Number of steps with `Φ_{n+1} > Φ_n`, ignoring steps where recovery reset `Φ`.
    pub fn increase_count(&self) -> usize {
        self.phi
            .windows(2)
            .zip(&self.diagnostics)
            .filter(|(w, d)| !d.recovery_triggered && w[1] > w[0])
            .count()
    }
}

/// Linear-solve and Newton accounting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CostStats {
    /// Solves performed by the main stepping loop.
    pub linear_solves: usize,
    /// Solves spent in a starting procedure or initial acceleration.
    pub startup_solves: usize,
    /// Total Newton iterations over all implicit sub-steps.
    pub newton_iterations: usize,
    /// Number of implicit sub-steps that ran Newton.
    pub newton_substeps: usize,
}

impl CostStats {
    /// Average Newton iterations per sub-step; explicit schemes report 1.
    pub fn average_newton_iterations(&self) -> f64 {
        if self.newton_substeps == 0 {
            1.0
        } else {
            self.newton_iterations as f64 / self.newton_substeps as f64
        }
    }
}

/// Which kinematic quantity to extract from a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kinematic {
    Displacement,
    Velocity,
    Acceleration,
}

impl Kinematic {
    pub const ALL: [Kinematic; 3] = [Self::Displacement, Self::Velocity, Self::Acceleration];

    pub fn label(self) -> &'static str {
        match self {
            Self::Displacement => "u",
            Self::Velocity => "v",
            Self::Acceleration => "a",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub scheme: String,
    pub dt: f64,
    pub states: Vec<State>,
    pub sav: Option<SavHistory>,
    /// First step whose state was non-finite, when the run diverged.
    pub divergence: Option<usize>,
    pub stats: CostStats,
}

impl Trajectory {
    pub(crate) fn new(scheme: impl Into<String>, dt: f64, capacity: usize) -> Self {
        Self {
            scheme: scheme.into(),
            dt,
            states: Vec::with_capacity(capacity),
            sav: None,
            divergence: None,
            stats: CostStats::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn is_divergent(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn last(&self) -> Option<&State> {
        self.states.last()
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn vectors(&self, kind: Kinematic) -> Vec<&DVector<f64>> {
        self.states
            .iter()
            .map(|s| match kind {
                Kinematic::Displacement => &s.u,
                Kinematic::Velocity => &s.v,
                Kinematic::Acceleration => &s.a,
            })
            .collect()
    }

    /// One degree of freedom of one kinematic quantity over time.
    pub fn series(&self, kind: Kinematic, dof: usize) -> Vec<f64> {
        self.vectors(kind).into_iter().map(|x| x[dof]).collect()
    }

    pub fn pseudo_energies(&self, sys: &SecondOrderSystem) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| pseudo_energy(sys, &s.u, &s.v))
            .collect()
    }

    pub fn all_finite(&self) -> bool {
        self.states.iter().all(State::is_finite)
    }
}

/// Number of uniform steps of size `dt` needed to reach `t_end`.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    let ratio = t_end / dt;
    let rounded = ratio.round();
    if (ratio - rounded).abs() <= 1e-9 * ratio.max(1.0) {
        rounded as usize
    } else {
        ratio.ceil() as usize
    }
}

/// Magnitude beyond which a state is treated as numerically divergent.
pub(crate) const DIVERGENCE_LIMIT: f64 = 1e100;

pub(crate) fn diverged(u: &DVector<f64>, v: &DVector<f64>) -> bool {
    u.iter()
        .chain(v.iter())
        .any(|x| !x.is_finite() || x.abs() > DIVERGENCE_LIMIT)
}
