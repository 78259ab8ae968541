//! Simulation and analysis of non-adiabatic holonomic one-qubit gates on the
//! four-level tripod system.
//!
//! The numeric core is generic over the scalar type ([`Real`]: `f32` or
//! `f64`); the aliases at the crate root fix it to `f64`, which is what the
//! analysis and the command-line runner use.

pub mod calibration;
pub mod error;
pub mod fidelity;
pub mod fit;
pub mod geometric;
pub mod linalg;
pub mod open_system;
pub mod path;
pub mod peak;
pub mod report;
pub mod robustness;
pub mod scalar;
pub mod tolerance;
pub mod tripod;

pub use error::{Error, Result};
pub use path::LoopFamily;
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type Matrix2 = geometric::Matrix2<f64>;
pub type Matrix4 = tripod::Matrix4<f64>;
pub type Point = tripod::SphericalPoint<f64>;
pub type Loop = path::LoopSpec<f64>;
pub type Arc = path::ArcSegment<f64>;
pub type Noise = open_system::NoiseModel<f64>;
pub type Density = open_system::DensityMatrix<f64>;
pub type Propagator = geometric::GatePropagator<f64>;
pub type States = fidelity::InputStateSet<f64>;
pub type Curve = fidelity::SweepCurve<f64>;
pub type Optimum = peak::OptimalPoint<f64>;
pub type Window = peak::PeakWindow<f64>;
pub type Fit = fit::FitResult<f64>;
pub type Robustness = robustness::RobustnessPoint<f64>;
