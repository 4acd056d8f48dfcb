//! Boundary blow-up ("large") solutions of `Δu = W'(u)` for convex potentials.
//!
//! The crate is organized bottom-up:
//!
//! * [`potential`]: the nonlinearity `W` and its hypothesis checks.
//! * [`ode_phase`]: one-dimensional orbits and blow-up length maps, evaluated
//!   by inverting time-map integrals.
//! * [`radial`]: radial barriers and ball/annulus profiles in any dimension.
//! * [`geometry`]: grid domains with labeled boundary parts and distances.
//! * [`pde_solver`]: Dirichlet and blow-up solvers on grid domains, and the
//!   decay, bound and comparison checks.

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod continuation;
pub mod error;
pub mod geometry;
mod linalg;
pub mod ode_phase;
pub mod pde_solver;
pub mod potential;
pub mod quadrature;
pub mod radial;
mod roots;

pub use chart::BlowupChart;
pub use continuation::{ContinuationConfig, ContinuationReport, LevelRecord, StopReason, TruncationRecord};
pub use error::{Error, Result};
pub use geometry::{
    build_domain, distance_field, BoundaryLink, CustomShape, DomainMask, GridDomain, NodeClass, PartitionSpec, Point,
    ShapeSpec, Target,
};
pub use ode_phase::{
    beta_halflengths, blowup_halflength, invert_halflength, make_orbit, OrbitSolution, OrbitSpec, Sign,
};
pub use pde_solver::{
    comparison_check, comparison_check_with, decay_check, signed_bounds_check, solve_blowup, solve_dirichlet,
    solve_dirichlet_with, solve_signed_blowup, BlowupConfig, BoundCheck, BoundReport, BoundaryMode, ComparisonReport,
    ComparisonTolerances, DirichletConfig, DirichletStats, Field,
};
pub use potential::{
    halving_inequality_check, validate_hypotheses, GrowthHint, Potential, SampleRange, ValidationReport,
};
pub use radial::{
    annulus_barrier, annulus_barrier_with, annulus_dirichlet, ball_blowup, barrier_divergence_check,
    whole_space_barrier, RadialConfig, RadialProfile,
};
