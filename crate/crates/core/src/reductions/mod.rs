//! Instance generators from 3-SAT and from rectilinear Steiner arborescence,
//! with the oracles needed to check them.

mod rsa;
mod sat;

pub use rsa::{from_rsa, parse_points, rsa_brute_force, RsaLayout, RsaPointSet};
pub use sat::{
    from_3sat, from_3sat_raw, from_3sat_symmetric, parse_dimacs, satisfiability_from_solution, CnfFormula,
    SatLayout,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error("{steiner} Steiner vertices exceed the brute-force cap of {cap}")]
    TooLarge { steiner: usize, cap: usize },
}
