//! Radial variational toolkit for the coupled Schrödinger–Maxwell system
//!
//!   -Δu + u + eφu = λ α(x) f(u),   -Δφ = 4πe u²   on ℝ³,
//!
//! with a continuous nonlinearity f that is superlinear at zero and sublinear
//! at infinity. Everything is restricted to radially symmetric fields sampled
//! on a truncated grid [0, r_max].
//!
//! The crate computes the explicit constants of the problem (the ratio bound
//! c_f, growth envelopes, truncation energy bounds, the certified parameter
//! window), certifies non-existence of nontrivial solutions for small λ, and
//! searches for the two predicted nontrivial radial solutions (a negative
//! energy minimizer and a mountain-pass point) for λ inside the window.

pub mod bounds;
pub mod commands;
pub mod config;
pub mod embedding;
pub mod energy;
pub mod grid;
pub mod model;
pub mod poisson;
pub mod profiles;
pub mod report;
pub mod solvers;
pub(crate) mod tridiag;
pub mod verify;

pub use energy::{EnergyBreakdown, Problem};
pub use grid::{NormReport, QuadratureRule, RadialFunction, RadialGrid};
pub use model::{Nonlinearity, Weight};
pub use poisson::PoissonSolution;
pub use solvers::{SolutionKind, SolutionPair, SweepRecord};
