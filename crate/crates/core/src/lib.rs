//! Exact wavefront tracking and junction inflow control for strictly concave
//! scalar conservation laws on a 1-1 network: one incoming road `x < 0` and one
//! outgoing road `x > 0` glued at a node sitting at `x = 0`.
//!
//! The crate provides:
//!
//! * concave flux models with branch inverses and companion states ([`flux`]),
//! * an exact Riemann solver and the relaxed (Bardos-LeRoux-Nedelec style)
//!   boundary resolution for half-line problems ([`riemann`]),
//! * an event-driven front-tracking engine producing piecewise-constant
//!   entropy solutions with queryable traces and snapshots ([`fronttrack`]),
//! * junction inflow controls built from boundary-data pairs, including the
//!   entropy reference control ([`junction`]),
//! * the node functionals: integrated flux, essential total variation, the
//!   flux-variation functional and the boundary-trace BV bound ([`functionals`]),
//! * generalized characteristics and divergence-balance diagnostics
//!   ([`characteristics`]),
//! * worked scenarios, randomized property suites and a min-variation control
//!   search ([`scenarios`]), driven by a config-file CLI ([`cli`]).

pub mod characteristics;
pub mod cli;
pub mod flux;
pub mod fronttrack;
pub mod functionals;
pub mod junction;
pub mod riemann;
pub mod scenarios;
pub mod step;

pub use flux::{Branch, FluxError, FluxModel};
pub use fronttrack::{Domain, FtSolution, Side};
pub use step::StepFunction;
