//! Prescribed shifted Gauss curvature for horo-convex radial graphs over S¹
//! and S² in hyperbolic space.
//!
//! Everything numerical is generic over [`scalar::Real`]; the aliases below
//! fix the scalar to `f64`.

pub mod continuation;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod linalg;
pub mod manufacture;
pub mod problem;
pub mod scalar;
pub mod solver;
pub mod surface;
pub mod verifier;

pub use continuation::{continue_from, continue_to_one, ContinuationTrace, StepConfig, TraceStatus};
pub use grid::{FdOrder, GridSpec};
pub use manufacture::{manufacture, ManufactureOptions, TargetSurface};
pub use solver::SolverConfig;
pub use verifier::{Check, VerificationReport};

pub type GridFunction = grid::GridFunction<f64>;
pub type Discretization = surface::Discretization<f64>;
pub type ProblemSpec = problem::ProblemSpec<f64>;
pub type RhsFamily = problem::RhsFamily<f64>;
pub type Phi = problem::Phi<f64>;
pub type NewtonSolver = solver::NewtonSolver<f64>;
pub type ContinuationRun = continuation::ContinuationRun<f64>;
pub type Manufactured = manufacture::Manufactured<f64>;
pub type GeometryFields = geometry::GeometryFields<f64>;
