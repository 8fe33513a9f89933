//! Worked scenarios, randomized property suites and the min-variation
//! control search.
//!
//! * [`shock_rarefaction`]: a non-monotone datum with a shock and a
//!   rarefaction on the incoming road; a constant-inflow control beats the
//!   entropy control's flux variation.
//! * [`straddling_jumps`]: a shock left of the node and a rarefaction right
//!   of it; a three-level control built from exact cumulative-flux balances
//!   beats the entropy control.
//! * [`fractal_datum`]: an unbounded-variation datum whose boundary flux
//!   trace accumulates variation linearly with truncation depth.
//! * [`suites`]: seeded randomized property suites (flux maximality, monotone
//!   minimality, trace-variation bound, conservation).
//! * [`search`]: exhaustive / coordinate-descent search for controls of small
//!   flux variation among the flux maximizers.

pub mod fractal_datum;
pub mod search;
pub mod shock_rarefaction;
pub mod straddling_jumps;
pub mod suites;

use crate::fronttrack::EngineError;
use crate::junction::JunctionError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("scenario claim failed: {0}")]
    ClaimFailed(String),
    #[error("invalid search specification: {0}")]
    InvalidSearch(String),
    #[error("search budget of {budget} evaluations exceeded (space of {space})")]
    SearchBudgetExceeded { budget: usize, space: usize },
    #[error(transparent)]
    Junction(#[from] JunctionError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// A named boolean check with the measured margin.
#[derive(Debug, Clone)]
pub struct Claim {
    pub name: String,
    pub passed: bool,
    pub margin: f64,
}

impl Claim {
    pub fn new(name: &str, passed: bool, margin: f64) -> Self {
        Claim { name: name.to_string(), passed, margin }
    }
}

pub fn all_pass(claims: &[Claim]) -> bool {
    claims.iter().all(|c| c.passed)
}
