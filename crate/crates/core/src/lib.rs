//! Gate-to-pulse-to-dynamics emulation of multi-level transmon processors.
//!
//! The pipeline runs OpenQASM → [`circuit::Circuit`] → [`transpiler`] →
//! [`pulse`] schedule → [`dynamics`] (Lindblad evolution) and the
//! [`validator`] checks each stage against an independent oracle.
//!
//! Numeric kernels are generic over [`Real`] (`f32` or `f64`); the aliases at
//! the crate root fix the scalar to `f64`, which is what the pipeline and CLI
//! use.

pub mod circuit;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod platform;
pub mod pulse;
pub mod qasm;
pub mod scalar;
pub mod transpiler;
pub mod validator;

pub use circuit::{Circuit, Gate, GateKind};
pub use error::{Error, Result};
pub use platform::{load_platform, PlatformSpec};
pub use pulse::{schedule, PulseSchedule, SchedulerPolicy};
pub use scalar::Real;

pub type Matrix64 = linalg::CMatrix<f64>;
pub type Matrix32 = linalg::CMatrix<f32>;
pub type DensityMatrix64 = dynamics::DensityMatrix<f64>;
pub type DensityMatrix32 = dynamics::DensityMatrix<f32>;
pub type SimResult64 = dynamics::SimResult<f64>;
pub type SimResult32 = dynamics::SimResult<f32>;
