//! Exact solvers for precedence-constrained minimum-cost arborescences.
//!
//! The crate covers the plain problem (PCMCA) and the waiting-times variant
//! (PCMCA-WT): instance I/O, Chu-Liu/Edmonds and max-flow primitives,
//! solution evaluation, min-cut separation, MILP formulations with LP export
//! and a dense simplex, branch-and-bound and brute-force solvers, reduction
//! generators and a CSV benchmark harness.
//!
//! Graph and LP code is generic over the scalar type through [`Weight`] and
//! [`Field`]; the aliases below pick the common instantiations.

pub mod bench;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod instance;
pub mod models;
pub mod reductions;
pub mod scalar;
pub mod separation;
pub mod solver;

pub use error::{DomainError, InstanceError, SolveError};
pub use evaluation::{Arborescence, TimedSolution};
pub use instance::{Arc, Instance, RawInstance};
pub use scalar::{Field, Weight};

/// Exact rational scalar.
pub type Rational = num_rational::BigRational;

/// Weighted digraph with floating-point weights, as built from LP values.
pub type DiGraphF64 = graph::DiGraph<f64>;
/// Weighted digraph with exact rational weights.
pub type DiGraphExact = graph::DiGraph<Rational>;

/// Linear model with floating-point coefficients.
pub type Model = models::LinearModel<f64>;
/// Linear model with exact rational coefficients.
pub type ExactModel = models::LinearModel<Rational>;

/// Fractional arc assignment with floating-point values.
pub type Fractional = separation::FractionalSolution<f64>;
/// Fractional arc assignment with exact rational values.
pub type ExactFractional = separation::FractionalSolution<Rational>;
