//! Node functionals: integrated flux, essential total variation, the
//! flux-variation functional with its endpoint penalty terms, and the
//! boundary-trace BV bound for the outgoing problem.

use crate::flux::FluxModel;
use crate::fronttrack::{FtSolution, Side};
use crate::step::StepFunction;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FunctionalError {
    #[error("bound hypotheses violated: {0}")]
    HypothesisViolated(String),
}

/// Essential variation of `g` strictly inside `(a, b)`.
pub fn essential_tv(g: &StepFunction, a: f64, b: f64) -> f64 {
    g.essential_tv(a, b)
}

/// Interior variation over `(c, d)` plus the two endpoint jump magnitudes.
pub fn closed_tv(g: &StepFunction, c: f64, d: f64) -> f64 {
    g.closed_tv(c, d)
}

/// Exact integral of the control over `(0, horizon)`.
pub fn integrated_flux(gamma: &StepFunction, horizon: f64) -> f64 {
    gamma.integral(0.0, horizon)
}

/// Breakdown of the flux-variation functional.
#[derive(Debug, Clone)]
pub struct VariationReport {
    pub j_value: f64,
    /// Essential variation of the control on the open interval.
    pub tv_interior: f64,
    /// `|f(u0(0-)) - gamma(0+)|`, `|f(u1(T,0)) - gamma(T-)|`,
    /// `|f(u0(0+)) - gamma(0+)|`, `|f(u2(T,0)) - gamma(T-)|`.
    pub boundary_terms: [f64; 4],
    pub total: f64,
}

/// The flux-variation functional of a control: interior variation of the node
/// flux plus the four jump penalties at `t = 0` and `t = T`. The terminal
/// traces are the one-sided spatial limits of the two terminal profiles.
pub fn variation_functional(
    model: &FluxModel,
    gamma: &StepFunction,
    u0: &StepFunction,
    incoming_terminal: f64,
    outgoing_terminal: f64,
    horizon: f64,
) -> VariationReport {
    let tv_interior = gamma.essential_tv(0.0, horizon);
    let g0 = gamma.first_value();
    let gt = gamma.last_value();
    let f_left0 = model.f(u0.limit_left(0.0));
    let f_right0 = model.f(u0.value_at(0.0));
    let boundary_terms = [
        (f_left0 - g0).abs(),
        (model.f(incoming_terminal) - gt).abs(),
        (f_right0 - g0).abs(),
        (model.f(outgoing_terminal) - gt).abs(),
    ];
    let total = tv_interior + boundary_terms.iter().sum::<f64>();
    VariationReport {
        j_value: gamma.integral(0.0, horizon),
        tv_interior,
        boundary_terms,
        total,
    }
}

/// Two sides of the boundary-trace BV bound for an outgoing solve.
#[derive(Debug, Clone)]
pub struct BvBoundReport {
    /// Essential variation of `f(u(·, 0+))` on `(0, T)`.
    pub lhs: f64,
    /// `2 tv(f∘k) + ||f'(u0)||_inf tv(u0) + osc(f)`.
    pub rhs: f64,
    pub tv_flux_datum: f64,
    pub lipschitz_on_data: f64,
    pub tv_initial: f64,
    pub osc: f64,
    pub holds: bool,
}

/// Largest gap `|f(k(t)) - f(u0(x))|` over the two finite value sets.
pub fn flux_oscillation(model: &FluxModel, u0: &StepFunction, k: &StepFunction) -> f64 {
    let mut osc = 0.0f64;
    for &kv in k.values() {
        for &uv in u0.values() {
            osc = osc.max((model.f(kv) - model.f(uv)).abs());
        }
    }
    osc
}

/// Evaluates both sides of the trace bound on an already-solved outgoing
/// problem with datum `u0` on `(0, ∞)` and boundary datum `k <= theta`.
pub fn bv_trace_bound(
    model: &FluxModel,
    u0: &StepFunction,
    k: &StepFunction,
    solution: &FtSolution,
) -> Result<BvBoundReport, FunctionalError> {
    let theta = model.theta();
    if k.values().iter().any(|&v| v > theta + crate::flux::ROOT_TOL) {
        return Err(FunctionalError::HypothesisViolated(format!(
            "outgoing boundary datum exceeds the critical state {theta}"
        )));
    }
    let tv_initial = u0.total_variation();
    let flux_datum = k.map(|v| model.f(v));
    let tv_flux_datum = flux_datum.total_variation();
    if !tv_initial.is_finite() || !tv_flux_datum.is_finite() {
        return Err(FunctionalError::HypothesisViolated("infinite data variation".into()));
    }
    let lipschitz_on_data = u0
        .values()
        .iter()
        .map(|&v| model.fp(v).abs())
        .fold(0.0f64, f64::max);
    let osc = flux_oscillation(model, u0, k);
    let lhs = solution
        .flux_trace(0.0, Side::Right)
        .essential_tv(0.0, solution.horizon);
    let rhs = 2.0 * tv_flux_datum + lipschitz_on_data * tv_initial + osc;
    Ok(BvBoundReport {
        lhs,
        rhs,
        tv_flux_datum,
        lipschitz_on_data,
        tv_initial,
        osc,
        holds: lhs <= rhs + 1e-9,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronttrack::solve_ibvp_outgoing;

    fn lwr() -> FluxModel {
        FluxModel::lwr()
    }

    #[test]
    fn essential_tv_examples() {
        let g = StepFunction::constant(0.0, 3.0, 0.21);
        assert_eq!(essential_tv(&g, 0.0, 3.0), 0.0);
        let g = StepFunction::new(0.0, 3.0, vec![1.0], vec![0.21, 0.09]).unwrap();
        assert!((essential_tv(&g, 0.0, 3.0) - 0.12).abs() < 1e-15);
    }

    #[test]
    fn variation_functional_of_two_level_control() {
        // gamma = f(b) on (0,tau), f(a1) after; datum value a3 on both sides of
        // the node; terminal states a1 on both sides
        let m = lwr();
        let gamma = StepFunction::new(0.0, 3.0, vec![1.0], vec![0.21, 0.09]).unwrap();
        let u0 = StepFunction::constant(f64::NEG_INFINITY, f64::INFINITY, 0.3);
        let rep = variation_functional(&m, &gamma, &u0, 0.1, 0.1, 3.0);
        assert!((rep.tv_interior - 0.12).abs() < 1e-15);
        assert!(rep.boundary_terms.iter().sum::<f64>() < 1e-12);
        assert!((rep.total - 0.12).abs() < 1e-12);
        assert!((rep.j_value - 0.39).abs() < 1e-12);
    }

    #[test]
    fn variation_functional_counts_all_four_penalties() {
        let m = lwr();
        let gamma = StepFunction::constant(0.0, 1.0, 0.25);
        let u0 = StepFunction::new(f64::NEG_INFINITY, f64::INFINITY, vec![0.0], vec![0.7, 0.2]).unwrap();
        // f(0.7)=0.21, f(0.2)=0.16, terminal states at the critical density
        let rep = variation_functional(&m, &gamma, &u0, 0.5, 0.5, 1.0);
        assert!((rep.boundary_terms[0] - 0.04).abs() < 1e-12);
        assert!((rep.boundary_terms[2] - 0.09).abs() < 1e-12);
        assert!(rep.boundary_terms[1] < 1e-12 && rep.boundary_terms[3] < 1e-12);
        assert!((rep.total - 0.13).abs() < 1e-12);
    }

    #[test]
    fn triangle_lower_bounds_hold() {
        // F(gamma) >= |f(u0(0+)) - f(u2(T,0))| and the incoming analogue
        let m = lwr();
        let gamma = StepFunction::new(0.0, 2.0, vec![0.5, 1.1], vec![0.16, 0.24, 0.09]).unwrap();
        let u0 = StepFunction::new(f64::NEG_INFINITY, f64::INFINITY, vec![-1.0], vec![0.4, 0.6]).unwrap();
        let (t_in, t_out) = (0.35, 0.55);
        let rep = variation_functional(&m, &gamma, &u0, t_in, t_out, 2.0);
        assert!(rep.total + 1e-12 >= (m.f(0.6) - m.f(t_out)).abs());
        assert!(rep.total + 1e-12 >= (m.f(0.4) - m.f(t_in)).abs());
    }

    #[test]
    fn chain_bound_for_composed_variation() {
        let m = lwr();
        let g = StepFunction::new(0.0, 1.0, vec![0.2, 0.5, 0.8], vec![0.1, 0.45, 0.2, 0.35]).unwrap();
        let fg = g.map(|v| m.f(v));
        let lip = m.max_wave_speed();
        assert!(fg.total_variation() <= lip * g.total_variation() + 1e-12);
    }

    #[test]
    fn bv_bound_constant_compatible_data() {
        let m = lwr();
        let u0 = StepFunction::constant(0.0, f64::INFINITY, 0.3);
        let k = StepFunction::constant(0.0, 2.0, 0.3);
        let sol = solve_ibvp_outgoing(&m, &u0, &k, 2.0, 1e-3).unwrap();
        let rep = bv_trace_bound(&m, &u0, &k, &sol).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.holds);
    }

    #[test]
    fn bv_bound_rarefaction_datum() {
        let m = lwr();
        let u0 = StepFunction::new(0.0, f64::INFINITY, vec![0.5], vec![0.7, 0.6]).unwrap();
        let k = StepFunction::constant(0.0, 2.0, 0.3);
        let sol = solve_ibvp_outgoing(&m, &u0, &k, 2.0, 1e-3).unwrap();
        let rep = bv_trace_bound(&m, &u0, &k, &sol).unwrap();
        assert!(rep.holds, "lhs={} rhs={}", rep.lhs, rep.rhs);
        assert!((rep.tv_initial - 0.1).abs() < 1e-15);
        assert_eq!(rep.tv_flux_datum, 0.0);
    }

    #[test]
    fn bv_bound_rejects_bad_datum() {
        let m = lwr();
        let u0 = StepFunction::constant(0.0, f64::INFINITY, 0.3);
        let k = StepFunction::constant(0.0, 2.0, 0.8);
        let sol = solve_ibvp_outgoing(
            &m,
            &u0,
            &StepFunction::constant(0.0, 2.0, 0.3),
            2.0,
            1e-3,
        )
        .unwrap();
        assert!(bv_trace_bound(&m, &u0, &k, &sol).is_err());
    }
}
