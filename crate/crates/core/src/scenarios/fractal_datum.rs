//! Truncated fractal-like datum on the outgoing road whose boundary flux
//! trace accumulates variation linearly with the truncation depth.
//!
//! On the flux `f(u) = -u^2/2` with critical state 0 and boundary datum
//! `k = 0`, the datum alternates between 1/2 on `(4/3 * 2^-n, 2^-(n-1))` and
//! 1 elsewhere, truncated to 1 below `4/3 * 2^-N`. Each level sheds one
//! rarefaction and one shock, both absorbed at the node without interacting
//! in `x > 0`; every level contributes at least `3/8` of flux-trace variation
//! while the boundary datum's flux is constant.

use super::ScenarioError;
use crate::flux::FluxModel;
use crate::fronttrack::{self, FtSolution, Side};
use crate::step::StepFunction;

#[derive(Debug)]
pub struct Outcome {
    pub depth: usize,
    pub tv_trace: f64,
    pub tv_flux_trace: f64,
    pub solution: FtSolution,
}

pub fn model() -> FluxModel {
    FluxModel::neg_half_square(-1.0, 2.0).expect("valid range")
}

/// The truncated datum: equal to 1 for `x < 4/3 * 2^-depth` and beyond 1.
pub fn initial_datum(depth: usize) -> StepFunction {
    let mut breaks = Vec::new();
    let mut values = vec![1.0];
    for n in (1..=depth).rev() {
        let lo = (4.0 / 3.0) * 0.5f64.powi(n as i32);
        let hi = 0.5f64.powi(n as i32 - 1);
        breaks.push(lo);
        values.push(0.5);
        breaks.push(hi);
        values.push(1.0);
    }
    StepFunction::new(0.0, f64::INFINITY, breaks, values).expect("ordered blocks")
}

pub fn run(depth: usize, delta: f64) -> Result<Outcome, ScenarioError> {
    let m = model();
    let u0 = initial_datum(depth);
    let horizon = 4.0 / 3.0;
    let k = StepFunction::constant(0.0, horizon, 0.0);
    let solution = fronttrack::solve_ibvp_outgoing(&m, &u0, &k, horizon, delta)?;
    let trace = solution.trace(0.0, Side::Right);
    let tv_trace = trace.essential_tv(0.0, horizon);
    let tv_flux_trace = solution.flux_trace(0.0, Side::Right).essential_tv(0.0, horizon);
    Ok(Outcome { depth, tv_trace, tv_flux_trace, solution })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_zero_is_quiet() {
        let out = run(0, 1e-3).unwrap();
        assert_eq!(out.tv_flux_trace, 0.0);
        assert_eq!(out.tv_trace, 0.0);
    }

    #[test]
    fn single_level_contributes_three_eighths() {
        let out = run(1, 1e-3).unwrap();
        assert!(out.tv_flux_trace >= 0.375 - 0.01, "tv={}", out.tv_flux_trace);
        // trace slides from 1 down to 1/2 and jumps back
        assert!(out.tv_trace >= 0.5 - 0.01);
    }

    #[test]
    fn variation_grows_linearly_with_depth() {
        let delta = 2e-3;
        let mut prev = 0.0;
        for depth in 1..=4 {
            let out = run(depth, delta).unwrap();
            assert!(
                out.tv_flux_trace >= 0.375 * depth as f64 - 10.0 * delta,
                "depth {depth}: tv={}",
                out.tv_flux_trace
            );
            assert!(out.tv_flux_trace > prev);
            prev = out.tv_flux_trace;
        }
    }

    #[test]
    fn trace_matches_self_similar_formula() {
        // u(t, 0) = (4/3) 2^-n / t inside the n-th window
        let out = run(3, 1e-3).unwrap();
        let tr = out.solution.trace(0.0, Side::Right);
        for n in 1..=3i32 {
            let w_lo = (4.0 / 3.0) * 0.5f64.powi(n);
            let w_hi = (4.0 / 3.0) * 0.5f64.powi(n - 1);
            let t = 0.5 * (w_lo + w_hi);
            let expect = (4.0 / 3.0) * 0.5f64.powi(n) / t;
            assert!(
                (tr.value_at(t) - expect).abs() <= 2e-3,
                "n={n}: got {} want {expect}",
                tr.value_at(t)
            );
        }
        // the outermost shock reaches the node exactly at the horizon, so the
        // trace ends on the fan tail
        assert!((tr.last_value() - 0.5).abs() < 2e-3, "last={}", tr.last_value());
    }
}
