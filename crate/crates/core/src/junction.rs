//! Junction inflow controls on the 1-1 network.
//!
//! A control is the common flux trace `gamma(t) = f(u1(t,0)) = f(u2(t,0))` of
//! a pair of half-line solutions driven by boundary data `(k1, k2)`. The two
//! initial-boundary value problems are solved independently; the pair is
//! admissible when the two flux traces agree up to `eps_match` outside a
//! negligible set of refinement slivers.

use crate::flux::{Branch, FluxModel};
use crate::fronttrack::{self, EngineError, FtSolution, Side};
use crate::step::StepFunction;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JunctionError {
    #[error("boundary pair is not an admissible control: flux traces diverge by {max_mismatch} from t={worst_time}")]
    NotAdmissible { max_mismatch: f64, worst_time: f64 },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Width below which a refinement sliver is ignored when comparing the two
/// flux traces ("a.e. t" reading of the coupling condition).
pub fn mismatch_min_width(horizon: f64) -> f64 {
    1e-9 * horizon.max(1.0)
}

/// Default admissibility tolerance on the flux match.
pub fn default_eps_match(model: &FluxModel) -> f64 {
    1e-9 * model.max_flux().abs().max(1.0)
}

/// Default tolerance on flux-integral comparisons; the rarefaction
/// discretization perturbs the integral at order `delta`.
pub fn default_eps_j(model: &FluxModel, horizon: f64, delta: f64) -> f64 {
    (2.0 * delta * horizon * model.max_wave_speed()).max(1e-9)
}

/// A junction inflow control with its generating boundary pair.
#[derive(Debug, Clone)]
pub struct Control {
    /// Common flux trace at the node, as a step function on `(0, horizon)`.
    pub gamma: StepFunction,
    pub k1: StepFunction,
    pub k2: StepFunction,
    /// Largest flux-trace mismatch observed between the two sides.
    pub max_mismatch: f64,
    /// Integrated flux over `(0, horizon)`.
    pub j_value: f64,
}

/// The two half-line solutions realizing an admissible control.
#[derive(Debug, Clone)]
pub struct CoupledSolution {
    pub incoming: FtSolution,
    pub outgoing: FtSolution,
    pub control: Control,
}

impl CoupledSolution {
    pub fn horizon(&self) -> f64 {
        self.incoming.horizon
    }

    /// One-sided terminal states `u1(T, 0^-)` and `u2(T, 0^+)`.
    pub fn terminal_node_states(&self) -> (f64, f64) {
        (
            self.incoming.terminal_node_state(Side::Left),
            self.outgoing.terminal_node_state(Side::Right),
        )
    }
}

/// Builds the reference control carried by the entropy solution of the
/// Cauchy problem on the whole line: `gamma = f(u(·,0))`, with boundary data
/// read back through the branch inverses. Returns the full-line solution for
/// downstream comparisons.
pub fn entropy_control(
    model: &FluxModel,
    u0: &StepFunction,
    horizon: f64,
    delta: f64,
) -> Result<(Control, FtSolution), JunctionError> {
    let full = fronttrack::solve_cauchy(model, u0, horizon, delta)?;
    let gamma = full.flux_trace(0.0, Side::Left);
    let k1 = gamma.map(|q| {
        model
            .branch_inverse(Branch::Congested, q)
            .expect("entropy flux trace stays below the maximum")
    });
    let k2 = gamma.map(|q| {
        model
            .branch_inverse(Branch::Free, q)
            .expect("entropy flux trace stays below the maximum")
    });
    let j_value = gamma.integral(0.0, horizon);
    Ok((Control { gamma, k1, k2, max_mismatch: 0.0, j_value }, full))
}

/// Solves the two half-line problems for the pair `(k1, k2)` (normalized onto
/// the entering branches) and certifies the flux match.
pub fn make_control(
    model: &FluxModel,
    u0: &StepFunction,
    k1: &StepFunction,
    k2: &StepFunction,
    horizon: f64,
    delta: f64,
    eps_match: f64,
) -> Result<CoupledSolution, JunctionError> {
    let u1 = u0.restrict(f64::NEG_INFINITY, 0.0);
    let u2 = u0.restrict(0.0, f64::INFINITY);
    let incoming = fronttrack::solve_ibvp_incoming(model, &u1, k1, horizon, delta)?;
    let outgoing = fronttrack::solve_ibvp_outgoing(model, &u2, k2, horizon, delta)?;
    let g1 = incoming.flux_trace(0.0, Side::Left);
    let g2 = outgoing.flux_trace(0.0, Side::Right);
    let w_min = mismatch_min_width(horizon);
    let (max_mismatch, _) = g1.sup_distance(&g2, 0.0, horizon, w_min);
    if max_mismatch > eps_match {
        let worst_time = g1
            .first_divergence(&g2, 0.0, horizon, eps_match, w_min)
            .unwrap_or(0.0);
        return Err(JunctionError::NotAdmissible { max_mismatch, worst_time });
    }
    let j_value = g1.integral(0.0, horizon);
    let k1 = incoming.boundary.clone().expect("incoming solve keeps its datum");
    let k2 = outgoing.boundary.clone().expect("outgoing solve keeps its datum");
    Ok(CoupledSolution {
        control: Control { gamma: g1, k1, k2, max_mismatch, j_value },
        incoming,
        outgoing,
    })
}

/// Membership in the maximizer set: the control's integrated flux matches the
/// reference value within `eps_j`.
pub fn is_flux_maximizer(candidate_j: f64, reference_j: f64, eps_j: f64) -> bool {
    (candidate_j - reference_j).abs() <= eps_j
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lwr() -> FluxModel {
        FluxModel::lwr()
    }

    fn full_line(breaks: &[f64], values: &[f64]) -> StepFunction {
        StepFunction::new(f64::NEG_INFINITY, f64::INFINITY, breaks.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn entropy_control_of_constant_datum() {
        let m = lwr();
        let u0 = full_line(&[], &[0.3]);
        let (ctrl, _full) = entropy_control(&m, &u0, 2.0, 1e-3).unwrap();
        assert_eq!(ctrl.gamma.values().len(), 1);
        assert!((ctrl.gamma.first_value() - 0.21).abs() < 1e-15);
        assert!((ctrl.k1.first_value() - 0.7).abs() < 1e-12);
        assert!((ctrl.k2.first_value() - 0.3).abs() < 1e-12);
        assert!((ctrl.j_value - 0.42).abs() < 1e-12);
    }

    #[test]
    fn constant_companion_pair_is_admissible() {
        let m = lwr();
        let u0 = full_line(&[], &[0.3]);
        let k1 = StepFunction::constant(0.0, 2.0, 0.7);
        let k2 = StepFunction::constant(0.0, 2.0, 0.3);
        let c = make_control(&m, &u0, &k1, &k2, 2.0, 1e-3, default_eps_match(&m)).unwrap();
        assert!((c.control.gamma.first_value() - 0.21).abs() < 1e-12);
        assert_eq!(c.control.gamma.values().len(), 1);
    }

    #[test]
    fn overdriven_incoming_datum_is_rejected() {
        // shock (0.3, 0.9) enters the incoming road, dropping its flux to 0.09
        // while the outgoing side keeps 0.21
        let m = lwr();
        let u0 = full_line(&[], &[0.3]);
        let k1 = StepFunction::constant(0.0, 2.0, 0.9);
        let k2 = StepFunction::constant(0.0, 2.0, 0.3);
        let err = make_control(&m, &u0, &k1, &k2, 2.0, 1e-3, default_eps_match(&m)).unwrap_err();
        match err {
            JunctionError::NotAdmissible { max_mismatch, worst_time } => {
                assert!((max_mismatch - 0.12).abs() < 1e-12, "mismatch {max_mismatch}");
                assert!(worst_time < 1e-9);
            }
            other => panic!("expected NotAdmissible, got {other:?}"),
        }
    }

    #[test]
    fn entropy_pair_reproduces_full_line_solution() {
        // shock + rarefaction datum: feed the entropy control's boundary pair
        // back through the coupled solver and compare against the restriction
        // of the full-line solution
        let m = lwr();
        let u0 = full_line(&[-0.5, -0.1], &[0.1, 0.4, 0.3]);
        let horizon = 3.0;
        let delta = 1e-3;
        let (ctrl, full) = entropy_control(&m, &u0, horizon, delta).unwrap();
        let c = make_control(&m, &u0, &ctrl.k1, &ctrl.k2, horizon, delta, default_eps_match(&m)).unwrap();
        assert!(c.control.max_mismatch <= 1e-9);
        // gamma agrees with the full-line flux trace
        let gamma_full = full.flux_trace(0.0, Side::Left);
        let (gap, _) = c
            .control
            .gamma
            .sup_distance(&gamma_full, 0.0, horizon, mismatch_min_width(horizon));
        assert!(gap <= 1e-9, "gamma gap {gap}");
        // L1 agreement of the half-line profiles at the horizon
        let left_full = full.snapshot(horizon).restrict(-10.0, 0.0);
        let left_pair = c.incoming.snapshot(horizon).restrict(-10.0, 0.0);
        assert!(left_pair.l1_distance(&left_full, -10.0, 0.0) < 10.0 * delta);
        let right_full = full.snapshot(horizon).restrict(0.0, 10.0);
        let right_pair = c.outgoing.snapshot(horizon).restrict(0.0, 10.0);
        assert!(right_pair.l1_distance(&right_full, 0.0, 10.0) < 10.0 * delta);
        // same integrated flux
        assert!((c.control.j_value - ctrl.j_value).abs() < default_eps_j(&m, horizon, delta));
    }

    #[test]
    fn gamma_never_exceeds_max_flux() {
        let m = lwr();
        let u0 = full_line(&[-1.0, 0.5], &[0.8, 0.1, 0.6]);
        let (ctrl, _) = entropy_control(&m, &u0, 4.0, 1e-3).unwrap();
        assert!(ctrl.gamma.max_value() <= m.max_flux() + 1e-12);
    }
}
