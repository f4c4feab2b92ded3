//! IMEX-BDFk-SAV time integration, `k = 1..=5`.
//!
//! Each step solves the linear part implicitly with a `k`-step backward
//! difference formula while the nonlinear force is extrapolated from the
//! history. The predictor `(u_im, v_im)` is then scaled by `Υ`, a factor driven
//! by the scalar auxiliary variable `Φ`, which keeps the pseudo-energy bounded
//! for every step size.

mod coefficients;
mod integrate;
mod psi_bound;
mod step;

pub use coefficients::{bdf_coefficients, beta_parameter, BdfCoefficients};
pub use integrate::{
    integrate_imex_bdf, integrate_sav, starting_steps, SavRunConfig, SavStepper, DEFAULT_EPS_TOL,
};
pub use psi_bound::{nonlinear_psi_bound, psi_from_prepass, PsiPrepass};
pub use step::{
    apply_update, extrapolate, imex_bdf_step, recovery_check, sav_update, scaling_factor,
    HistoryBuffer, ImexBdfStepper, SavUpdate,
};
