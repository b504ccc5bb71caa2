//! Exact, desk-scale toolkit for budget-robust maximum flows over time.
//!
//! A flow-over-time instance carries travel times and per-edge delays; an
//! adversary may delay up to `gamma` edges at once. This crate builds such
//! instances, solves for optimal temporally repeated and general (dispatch
//! interval) robust flows with an exact rational simplex, evaluates
//! worst-case scenarios, verifies candidate solutions, generates the
//! hardness/gap instance families, and computes the structural parameters
//! (T-boundedness, coverability number k, cutoff ratio eta) that control
//! the optimality gap of temporally repeated flows.
//!
//! All arithmetic is exact: flow rates, capacities and LP data are
//! arbitrary-precision rationals, so results like `6/11` are reproduced
//! bit-exactly rather than within a tolerance.

pub mod analysis;
pub mod evaluation;
pub mod generators;
pub mod lp;
pub mod model;
pub mod paths;
pub mod solvers;

pub use model::{
    Capacity, Delay, Edge, Instance, Path, Rational, Scenario, TemporallyRepeatedFlow, Triple,
    TripleSolution,
};

use thiserror::Error;

/// Enumeration limits protecting against inputs beyond desk scale.
///
/// All limits are overridable (the CLI exposes them as flags). Hitting a cap
/// is a refusal, not a wrong answer: the operation returns
/// [`Error::CapExceeded`] instead of silently truncating.
#[derive(Debug, Clone)]
pub struct Caps {
    /// Maximum number of simple s-d paths enumerated.
    pub max_paths: u64,
    /// Maximum number of scenarios enumerated (also bounds the verifier's
    /// effective scenario count times checked edges).
    pub max_scenarios: u64,
    /// Maximum number of constraint-matrix nonzeros in a single LP solve.
    pub max_lp_nonzeros: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_paths: 1_000_000,
            max_scenarios: 10_000_000,
            max_lp_nonzeros: 50_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} count {actual} exceeds desk-scale cap {cap}")]
    CapExceeded {
        what: &'static str,
        actual: u128,
        cap: u128,
    },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    #[error("edge {edge} is not on the given path")]
    EdgeNotOnPath { edge: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linear program is unbounded: {0}")]
    Unbounded(String),
}

pub type Result<T> = std::result::Result<T, Error>;
