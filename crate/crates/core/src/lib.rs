//! Simulation and verification toolkit for the stochastically forced
//! Lorenz-96 system with forcing on every third mode.
//!
//! * [`model`]: vector fields, bilinear form, Jacobian and the transverse
//!   interaction matrices `M_k`.
//! * [`sde`]: tamed Euler-Maruyama integration, the OU base process,
//!   synchronization pairs and the super-Lyapunov probe.
//! * [`cocycle`]: transverse (projective) dynamics and estimators for the
//!   transverse Lyapunov exponent, determinant rate and moment exponent.
//! * [`lie`]: exact rational bracket closure of `{M_k}` and Hörmander rank
//!   checks.
//! * [`experiments`]: reproducible drivers, config files and reports.
//!
//! The numeric code is generic over the scalar type; the aliases below
//! fix the usual choices.

pub mod cocycle;
pub mod error;
pub mod experiments;
pub mod lie;
pub mod matrix;
pub mod model;
pub mod noise;
pub mod scalar;
pub mod sde;
pub mod stats;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{ExactField, Real, Ring};

/// Exact rational scalar used by the algebra checks.
pub type Rational = num_rational::BigRational;
/// Dense matrix of exact rationals.
pub type RationalMatrix = Matrix<Rational>;
/// Dense integer matrix (entries of `M_k` and `DB` at integer points).
pub type IntMatrix = Matrix<i64>;
/// Double precision state of the full system.
pub type State = model::StateVector<f64>;
/// Double precision configuration.
pub type Config = model::L96Config<f64>;
/// Single precision configuration.
pub type Config32 = model::L96Config<f32>;
