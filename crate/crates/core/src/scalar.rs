//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All graph quantities (weights, cuts, stationary masses, Laplacian
//! entries) are expressed over a [`Scalar`]. The bound is nalgebra's
//! [`RealField`] so that the dense eigen/linear solvers can be reused for
//! both `f32` and `f64`, plus the num-traits conversion traits used to lift
//! literals and counts into the field.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Default + Debug + Display + Send + Sync + 'static
{
    /// Machine epsilon of the underlying float.
    const EPSILON: Self;

    /// Lift an `f64` literal. Panics only if the value is not representable,
    /// which cannot happen for finite literals in `f32`/`f64`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits in the scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Default absolute tolerance for iterative solvers: `1e-12`, or a small
    /// multiple of epsilon when the type cannot resolve that.
    #[inline]
    fn solver_tol() -> Self {
        let floor = Self::EPSILON * Self::lit(256.0);
        let target = Self::lit(1e-12);
        if floor > target {
            floor
        } else {
            target
        }
    }
}

impl Scalar for f64 {
    const EPSILON: Self = f64::EPSILON;
}

impl Scalar for f32 {
    const EPSILON: Self = f32::EPSILON;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_and_counts() {
        assert_eq!(f64::lit(0.5), 0.5);
        assert_eq!(f32::from_count(3), 3.0f32);
        assert_eq!(f64::solver_tol(), 1e-12);
        assert!(f32::solver_tol() > 1e-6);
    }
}
