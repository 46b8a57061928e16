//! Probably-approximately-correct surrogate models for black-box
//! continuous-time systems.
//!
//! The pipeline samples trajectories of an oracle ([`oracle`]), fits a
//! linearly parameterized template by a scenario linear program
//! ([`lp`]), bounds the resulting tube and decides safety
//! ([`verify`]), and cross-checks the tube by simulation
//! ([`montecarlo`]). Sample sizes come from [`pac`].
//!
//! The numeric kernels (integrators, simplex, interval and root-isolation
//! code) are generic over [`Scalar`]; the pipeline types below fix the
//! scalar to `f64`.

pub mod error;
pub mod lp;
pub mod montecarlo;
pub mod oracle;
pub mod pac;
pub mod sampling;
pub mod scalar;
pub mod template;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Double-precision dense trajectory.
pub type Trajectory = oracle::DenseTrajectory<f64>;
/// Single-precision dense trajectory.
pub type Trajectory32 = oracle::DenseTrajectory<f32>;
