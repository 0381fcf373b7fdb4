//! Scalar radial model of an elastic string in 2D Stokes flow, with an
//! independent full vector contour solver, time integrators and monitors.
//!
//! Everything is generic over [`Real`]; the aliases below fix `f64`.

pub mod diagnostics;
pub mod error;
pub mod evolution;
pub mod model;
pub mod quadrature;
pub mod real;
pub mod sampling;
pub mod spectral;
pub mod stokeslet;

pub use error::{Error, Result};
pub use real::Real;

pub type GridFunction = spectral::PeriodicGridFunction<f64>;
pub type Coefficients = spectral::SpectralCoeffs<f64>;
pub type Rule = quadrature::QuadratureRule<f64>;
pub type State = model::RadialState<f64>;
pub type Curve = stokeslet::VectorCurveState<f64>;
pub type Kernel = stokeslet::LogKernelWeights<f64>;
pub type Run = evolution::Trajectory<f64>;
