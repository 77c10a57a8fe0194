//! Scalar abstraction shared by the numeric kernels.
//!
//! Everything that does linear algebra or integrates dynamics is generic over
//! [`Real`]; artifacts (platforms, circuits, schedules) stay in `f64`.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type usable by the simulator: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Machine epsilon scaled to a convergence threshold for iterative kernels.
    fn solver_eps() -> Self;
}

impl Real for f32 {
    fn solver_eps() -> Self {
        1e-6
    }
}

impl Real for f64 {
    fn solver_eps() -> Self {
        1e-14
    }
}

/// Converts an `f64` constant into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in target scalar")
}

/// Converts `T` back to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[inline]
pub fn cplx<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(lit(re), lit(im))
}

/// `e^{iθ}`
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}
