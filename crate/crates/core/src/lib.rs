//! Gradient-free saddle-point solver: stochastic mirror descent driven by a
//! two-point randomized-smoothing gradient estimator, for non-smooth
//! convex–concave objectives observed through an adversarially noised
//! zeroth-order oracle.
//!
//! Numeric kernels (geometry, sampling, rate fitting) are generic over the
//! scalar type; the problem and solver layers fix [`Real`] = `f64`, the
//! precision the step-size theory is calibrated against.

pub mod config;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod metrics;
pub mod noise;
pub mod problems;
pub mod restarts;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod verify;

/// Working precision of the solver stack.
pub type Real = f64;

/// Concrete aliases for the generic kernels at both supported precisions.
pub type DomainSpec64 = geometry::DomainSpec<f64>;
pub type DomainSpec32 = geometry::DomainSpec<f32>;
pub type ProxSetup64 = geometry::ProxSetup<f64>;
pub type ProxSetup32 = geometry::ProxSetup<f32>;
pub type HeavyTailSetup64 = geometry::HeavyTailSetup<f64>;
pub type HeavyTailSetup32 = geometry::HeavyTailSetup<f32>;
pub type RateFit64 = metrics::RateFit<f64>;
pub type RateFit32 = metrics::RateFit<f32>;

pub use error::{Error, Result};
pub use geometry::{DomainKind, DomainSpec, HeavyTailSetup, ProxKind, ProxSetup};
pub use noise::{NoiseKind, NoiseModel};
pub use problems::{GrowthSpec, Matrix, SaddleProblem};
pub use restarts::{NoiseRegime, RestartSchedule};
pub use solver::{solve, Mode, RunReport, SolverConfig, StepRule};
pub use verify::LemmaCheckReport;
