//! Implicit-explicit BDF integrators with scalar-auxiliary-variable
//! stabilization for nonlinear structural dynamics, together with classical
//! comparison schemes, benchmark problems and error measures.

pub mod baselines;
pub mod bdf_sav;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod lte;
pub mod metrics;
pub mod problems;
pub mod quadrature;
pub mod reference;
pub mod rk;
pub mod system;
pub mod trajectory;

pub use error::{Error, Result};
pub use system::{SecondOrderSystem, State};
pub use trajectory::Trajectory;
