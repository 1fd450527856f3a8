//! Numerical construction of entire blow-up solutions for quasilinear
//! p-Laplacian equations with a non-square diffusion term.
//!
//! The crate builds the dual change of variables `u = f(w)`, classifies
//! the integral growth hypotheses for user-supplied data `(p, γ, N, g, a)`,
//! solves the transformed radial problem by monotone Picard iteration with
//! an independent shooting cross-check, and exhibits the non-radial
//! sandwich construction on balls at desk scale.
//!
//! Everything numeric is generic over the scalar type (`f32` or `f64`)
//! through [`scalar::Real`]; concrete `f64` aliases live at the crate root.

pub mod band;
pub mod conditions;
pub mod config;
pub mod error;
pub mod grid;
pub mod interp;
pub mod model;
pub mod ode;
pub mod pipeline;
pub mod quad;
pub mod radial;
pub mod sandwich;
pub mod rootfind;
pub mod scalar;
pub mod transform;

pub use config::{load_config, validate_config, RunConfig, TaskKind};
pub use error::{Error, Result};
pub use pipeline::{run, RunOutcome, RunStatus};
pub use model::{Nonlinearity, NonlinearityKind, Potential, RadialProfile};
pub use radial::{RadialSolution, SolverOptions};
pub use sandwich::{BallOptions, BallSolution, SandwichReport};
pub use scalar::Real;
pub use transform::{log_grid, DualTransform, ProblemParams, PropertyReport};

/// Concrete aliases for the common double-precision instantiation.
pub type Params64 = ProblemParams<f64>;
pub type DualTransform64 = DualTransform<f64>;
pub type PropertyReport64 = PropertyReport<f64>;
pub type Nonlinearity64 = Nonlinearity<f64>;
pub type Potential64 = Potential<f64>;
pub type RadialSolution64 = RadialSolution<f64>;
