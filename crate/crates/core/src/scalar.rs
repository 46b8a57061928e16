//! Scalar abstraction shared by the numeric kernels.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar usable by the integrators, the simplex solver and
/// the range-bounding code.
///
/// The tolerance constants are tuned per precision; the `f64` values are the
/// ones every default in this crate is calibrated against.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Absolute feasibility / optimality tolerance for linear programs.
    const FEAS_TOL: Self;
    /// Smallest pivot magnitude accepted by the simplex ratio test.
    const PIVOT_TOL: Self;
    /// Width below which root-isolating intervals are no longer bisected
    /// (in the units of the polynomial variable).
    const ROOT_TOL: Self;

    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }

    fn from_usize_lossy(v: usize) -> Self {
        Self::from_usize(v).unwrap_or_else(Self::infinity)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// One unit in the last place of `self`, never zero.
    fn ulp(self) -> Self {
        (self.abs() * Self::epsilon()).max(Self::min_positive_value())
    }
}

impl Scalar for f64 {
    const FEAS_TOL: f64 = 1e-9;
    const PIVOT_TOL: f64 = 1e-10;
    const ROOT_TOL: f64 = 1e-12;
}

impl Scalar for f32 {
    const FEAS_TOL: f32 = 1e-4;
    const PIVOT_TOL: f32 = 1e-5;
    const ROOT_TOL: f32 = 1e-6;
}
