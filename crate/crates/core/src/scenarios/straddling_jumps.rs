//! Straddling-jumps scenario: a shock sheds left of the node, a rarefaction
//! right of it.
//!
//! Datum `a1 | a2 | a3` with `x1 < 0 < x2` and `a1 < theta < a3 < a2`,
//! `f(a1) < f(a2) < f(a3)`. The rarefaction from `x2` runs left, sweeps the
//! node during `(t1, t2)`, cancels against the shock in `x < 0`, and the
//! merged shock returns to the node at `t3`. The constructed control replaces
//! the fan's hump by a single intermediate flux level `phi = f(a4)` on
//! `(t4, t6)`, with `t4` and `t6` fixed by exact cumulative-flux balances so
//! that the flux maximum is preserved.

use super::{Claim, ScenarioError};
use crate::characteristics::{rarefaction_flux_integral, ride_front_chain, CharOrigin};
use crate::flux::{Branch, FluxModel};
use crate::fronttrack::{FtSolution, Side};
use crate::functionals::{variation_functional, VariationReport};
use crate::junction::{self, Control, CoupledSolution};
use crate::step::StepFunction;

#[derive(Debug, Clone)]
pub struct Params {
    pub left_state: f64,
    pub mid_state: f64,
    pub right_state: f64,
    pub x_first: f64,
    pub x_second: f64,
    /// Intermediate flux level `f(a4)`; `None` picks the midpoint of the
    /// feasible band.
    pub ctrl_flux: Option<f64>,
    pub horizon: f64,
    pub delta: f64,
}

impl Params {
    /// Instance on the standard LWR flux.
    pub fn canonical() -> Self {
        Params {
            left_state: 0.2,
            mid_state: 0.7,
            right_state: 0.6,
            x_first: -1.0,
            x_second: 0.5,
            ctrl_flux: Some(0.23),
            horizon: 8.0,
            delta: 1e-3,
        }
    }

    pub fn initial_datum(&self) -> StepFunction {
        StepFunction::new(
            f64::NEG_INFINITY,
            f64::INFINITY,
            vec![self.x_first, self.x_second],
            vec![self.left_state, self.mid_state, self.right_state],
        )
        .expect("scenario datum is canonical")
    }

    fn validate(&self, model: &FluxModel) -> Result<(), ScenarioError> {
        let (a1, a2, a3) = (self.left_state, self.mid_state, self.right_state);
        let theta = model.theta();
        if !(a1 < theta && theta < a3 && a3 < a2) {
            return Err(ScenarioError::ConstraintViolated(format!(
                "need a1 < theta < a3 < a2, got {a1}, theta={theta}, {a3}, {a2}"
            )));
        }
        let (f1, f2, f3) = (model.f(a1), model.f(a2), model.f(a3));
        if !(f1 < f2 && f2 < f3) {
            return Err(ScenarioError::ConstraintViolated(format!(
                "need f(a1) < f(a2) < f(a3), got {f1}, {f2}, {f3}"
            )));
        }
        if !(self.x_first < 0.0 && 0.0 < self.x_second) {
            return Err(ScenarioError::ConstraintViolated(format!(
                "need x1 < 0 < x2, got {} and {}",
                self.x_first, self.x_second
            )));
        }
        let lambda = model.shock_speed(a1, a2).expect("distinct states");
        if !(lambda > 0.0) {
            return Err(ScenarioError::ConstraintViolated(format!(
                "initial shock must run right, speed {lambda}"
            )));
        }
        Ok(())
    }
}

/// The exact interaction times of the entropy solution.
#[derive(Debug, Clone, Copy)]
pub struct NodeTimes {
    /// First fan arrival `-x2 / f'(a2)`.
    pub t1: f64,
    /// Last fan arrival `-x2 / f'(a3)`.
    pub t2: f64,
    /// Merged-shock arrival, from mass balance on `(0,t3) x (x1,x2)`.
    pub t3: f64,
    /// Handover time balancing the fan hump against a two-level profile.
    pub t4: f64,
    /// Final drop time of the constructed control.
    pub t6: f64,
}

#[derive(Debug)]
pub struct Outcome {
    pub times: NodeTimes,
    /// `t6` recomputed by bisection on the cumulative balance.
    pub t6_bissection: f64,
    /// Engine-observed arrival of the merged shock at the node (entropy run).
    pub t3_engine: f64,
    /// Engine-observed final drop of the constructed incoming flux.
    pub t6_engine: f64,
    /// Flux level of the constructed control.
    pub ctrl_flux: f64,
    /// Level with `t6 = T`, the smallest usable in this construction.
    pub family_optimal_flux: f64,
    pub family_optimal_variation: f64,
    pub f_entropy: VariationReport,
    pub f_constructed: VariationReport,
    pub entropy_control: Control,
    pub entropy_full: FtSolution,
    pub constructed: CoupledSolution,
    pub claims: Vec<Claim>,
}

/// Cumulative node flux of the entropy solution, `Gamma(t) = ∫_0^t f(u(s,0)) ds`,
/// in closed form.
pub fn cumulative_entropy_flux(model: &FluxModel, p: &Params, times: &NodeTimes, t: f64) -> f64 {
    let (f1, f2, f3) = (
        model.f(p.left_state),
        model.f(p.mid_state),
        model.f(p.right_state),
    );
    let mut acc = f2 * t.min(times.t1);
    if t > times.t1 {
        acc += rarefaction_flux_integral(model, p.x_second, 0.0, times.t1, t.min(times.t2));
    }
    if t > times.t2 {
        acc += f3 * (t.min(times.t3) - times.t2);
    }
    if t > times.t3 {
        acc += f1 * (t - times.t3);
    }
    acc
}

fn bisect(mut lo: f64, mut hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    // assumes f(lo) and f(hi) bracket a root of a monotone function
    let descending = f(lo) > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if (v > 0.0) == descending {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Exact interaction times. `ctrl_flux` only enters `t6`.
pub fn node_times(model: &FluxModel, p: &Params, ctrl_flux: f64) -> Result<NodeTimes, ScenarioError> {
    let (a1, a2, a3) = (p.left_state, p.mid_state, p.right_state);
    let (f1, f2, f3) = (model.f(a1), model.f(a2), model.f(a3));
    let t1 = -p.x_second / model.fp(a2);
    let t2 = -p.x_second / model.fp(a3);
    let t3 = (a1 * p.x_first - a3 * p.x_second + a2 * (p.x_second - p.x_first)) / (f3 - f1);
    if !(t2 < t3) {
        return Err(ScenarioError::ConstraintViolated(format!(
            "fan must cancel inside x < 0 before the merged shock returns: t2={t2} >= t3={t3}"
        )));
    }
    if !(t3 < p.horizon) {
        return Err(ScenarioError::ConstraintViolated(format!(
            "merged shock must return before the horizon: t3={t3} >= T={}",
            p.horizon
        )));
    }
    let mut times = NodeTimes { t1, t2, t3, t4: f64::NAN, t6: f64::NAN };
    // hump balance: ∫_{t1}^{t3} gamma = (t4-t1) f(a2) + (t3-t4) f(a3)
    let hump = cumulative_entropy_flux(model, p, &times, t3) - cumulative_entropy_flux(model, p, &times, t1);
    times.t4 = bisect(t1, t2, |t4| (t4 - t1) * f2 + (t3 - t4) * f3 - hump);
    // drop balance at level phi: ∫_{t1}^{t6} gamma = (t4-t1) f(a2) + (t6-t4) phi
    let t6_linear = times.t3 + (t3 - times.t4) * (f3 - ctrl_flux) / (ctrl_flux - f1);
    times.t6 = bisect(t3, t6_linear + 1.0, |t6| {
        let lhs = cumulative_entropy_flux(model, p, &times, t6) - cumulative_entropy_flux(model, p, &times, t1);
        lhs - ((times.t4 - t1) * f2 + (t6 - times.t4) * ctrl_flux)
    });
    Ok(times)
}

/// Closed-form final drop time from the mass balance on the triangle spanned
/// by the node and the foot of the first jump.
pub fn drop_time_formula(model: &FluxModel, p: &Params, t4: f64, ctrl_flux: f64) -> f64 {
    let (f1, f2) = (model.f(p.left_state), model.f(p.mid_state));
    (-(p.mid_state - p.left_state) * p.x_first + t4 * (ctrl_flux - f2)) / (ctrl_flux - f1)
}

/// Flux level whose drop time is exactly the horizon; levels below are
/// infeasible for this construction.
pub fn family_optimal_flux(model: &FluxModel, p: &Params, t4: f64) -> f64 {
    let (f1, f2) = (model.f(p.left_state), model.f(p.mid_state));
    (p.horizon * f1 - (p.mid_state - p.left_state) * p.x_first - t4 * f2) / (p.horizon - t4)
}

pub fn run(model: &FluxModel, params: &Params) -> Result<Outcome, ScenarioError> {
    params.validate(model)?;
    let p = params;
    let (a1, a2) = (p.left_state, p.mid_state);
    let (f1, f2, f3) = (model.f(a1), model.f(a2), model.f(p.right_state));
    let horizon = p.horizon;
    let delta = p.delta;

    // times that do not depend on the control level
    let probe = node_times(model, p, 0.5 * (f2 + f3))?;
    let phi_opt = family_optimal_flux(model, p, probe.t4);
    let feasible_lo = phi_opt.max(f2);
    let ctrl_flux = match p.ctrl_flux {
        Some(q) => q,
        None => 0.5 * (feasible_lo + f3),
    };
    if !(ctrl_flux > f2 && ctrl_flux < f3) {
        return Err(ScenarioError::ConstraintViolated(format!(
            "control level must satisfy f(a2) < phi < f(a3), got {ctrl_flux}"
        )));
    }
    let times = node_times(model, p, ctrl_flux)?;
    let t6_formula = drop_time_formula(model, p, times.t4, ctrl_flux);
    if !(times.t3 < t6_formula && t6_formula < horizon) {
        return Err(ScenarioError::ConstraintViolated(format!(
            "drop time must lie in (t3, T): t6={t6_formula}, t3={}, T={horizon}",
            times.t3
        )));
    }

    let u0 = p.initial_datum();
    let (entropy_ctrl, entropy_full) = junction::entropy_control(model, &u0, horizon, delta)?;
    let f_entropy = variation_functional(
        model,
        &entropy_ctrl.gamma,
        &u0,
        entropy_full.terminal_node_state(Side::Left),
        entropy_full.terminal_node_state(Side::Right),
        horizon,
    );

    // boundary data realizing the three-level control
    let upper = |q: f64| model.branch_inverse(Branch::Congested, q).expect("level below max");
    let lower = |q: f64| model.branch_inverse(Branch::Free, q).expect("level below max");
    let (t4, t6) = (times.t4, t6_formula);
    let k1 = StepFunction::new(0.0, horizon, vec![t4, t6], vec![a2, upper(ctrl_flux), upper(f1)])
        .expect("ordered times");
    let k2 = StepFunction::new(
        0.0,
        horizon,
        vec![times.t1, t4, t6],
        vec![a2, lower(f2), lower(ctrl_flux), lower(f1)],
    )
    .expect("ordered times");
    let constructed = junction::make_control(
        model,
        &u0,
        &k1,
        &k2,
        horizon,
        delta,
        junction::default_eps_match(model),
    )?;
    let (term_in, term_out) = constructed.terminal_node_states();
    let f_constructed = variation_functional(model, &constructed.control.gamma, &u0, term_in, term_out, horizon);

    // engine-observed interaction times from the flux traces
    let gamma_e = &entropy_ctrl.gamma;
    let t3_engine = gamma_e
        .breaks()
        .iter()
        .zip(gamma_e.values().iter().skip(1))
        .find(|(_, &v)| (v - f1).abs() <= 1e-9)
        .map(|(&t, _)| t)
        .unwrap_or(f64::NAN);
    let gamma_c = &constructed.control.gamma;
    let t6_engine = gamma_c
        .breaks()
        .iter()
        .zip(gamma_c.values().iter().skip(1))
        .find(|(_, &v)| (v - f1).abs() <= 1e-9)
        .map(|(&t, _)| t)
        .unwrap_or(f64::NAN);

    // the shock shed into x > 0 at the first fan arrival must stay there
    let node_shock = constructed
        .outgoing
        .node_born_fronts()
        .into_iter()
        .filter(|&id| constructed.outgoing.fronts[id].t_birth > 0.5 * times.t1)
        .min_by(|&a, &b| {
            constructed.outgoing.fronts[a]
                .t_birth
                .partial_cmp(&constructed.outgoing.fronts[b].t_birth)
                .unwrap()
        });
    let (shock_stays, shock_min_pos) = match node_shock {
        Some(id) => {
            let chain = ride_front_chain(&constructed.outgoing, id);
            let stays = matches!(chain.origin, CharOrigin::HorizonEnd(_));
            (stays, chain.min_position())
        }
        None => (false, f64::NAN),
    };

    // cumulative-flux domination: equality up to t1, strict excess afterwards
    let k2_flux_cum = |t: f64| constructed.control.k2.map(|v| model.f(v)).integral(0.0, t);
    let mut cum_equal = true;
    let mut cum_dominates = true;
    for i in 0..=20 {
        let t = times.t1 * (i as f64) / 20.0;
        let d = cumulative_entropy_flux(model, p, &times, t) - k2_flux_cum(t);
        cum_equal &= d.abs() <= 1e-9;
    }
    for i in 1..40 {
        let t = times.t1 + (t6 - times.t1) * (i as f64) / 40.0;
        let d = cumulative_entropy_flux(model, p, &times, t) - k2_flux_cum(t);
        cum_dominates &= d > -1e-9;
    }

    let eps_j = junction::default_eps_j(model, horizon, delta);
    let expected_f_entropy = 2.0 * f3 - f1 - f2;
    let expected_f_constructed = 2.0 * ctrl_flux - f1 - f2;
    let phi_family = family_optimal_flux(model, p, times.t4);
    let family_f = 2.0 * phi_family - f1 - f2;

    let claims = vec![
        Claim::new(
            "bisection drop time matches the mass-balance formula",
            (times.t6 - t6_formula).abs() <= 1e-9,
            (times.t6 - t6_formula).abs(),
        ),
        Claim::new("t3 < t6 < T", times.t3 < t6_formula && t6_formula < horizon, (t6_formula - times.t3).min(horizon - t6_formula)),
        Claim::new(
            "engine reproduces the merged-shock arrival",
            (t3_engine - times.t3).abs() <= 1e-6,
            (t3_engine - times.t3).abs(),
        ),
        Claim::new(
            "engine reproduces the final drop time",
            (t6_engine - t6_formula).abs() <= 1e-6,
            (t6_engine - t6_formula).abs(),
        ),
        Claim::new("node shock stays in x > 0", shock_stays && shock_min_pos >= -1e-9, shock_min_pos),
        Claim::new("cumulative flux equality up to t1", cum_equal, 0.0),
        Claim::new("cumulative flux domination on (t1, t6)", cum_dominates, 0.0),
        Claim::new(
            "entropy variation matches 2 f(a3) - f(a1) - f(a2)",
            (f_entropy.total - expected_f_entropy).abs() <= 1e-6,
            (f_entropy.total - expected_f_entropy).abs(),
        ),
        Claim::new(
            "constructed variation matches 2 phi - f(a1) - f(a2)",
            (f_constructed.total - expected_f_constructed).abs() <= 1e-6,
            (f_constructed.total - expected_f_constructed).abs(),
        ),
        Claim::new(
            "constructed control keeps the maximal flux",
            junction::is_flux_maximizer(constructed.control.j_value, entropy_ctrl.j_value, eps_j),
            (constructed.control.j_value - entropy_ctrl.j_value).abs(),
        ),
        Claim::new(
            "constructed beats the entropy variation",
            f_constructed.total < f_entropy.total,
            f_entropy.total - f_constructed.total,
        ),
    ];

    Ok(Outcome {
        times: NodeTimes { t6: t6_formula, ..times },
        t6_bissection: times.t6,
        t3_engine,
        t6_engine,
        ctrl_flux,
        family_optimal_flux: phi_family,
        family_optimal_variation: family_f,
        f_entropy,
        f_constructed,
        entropy_control: entropy_ctrl,
        entropy_full,
        constructed,
        claims,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::all_pass;

    #[test]
    fn canonical_times_and_variations() {
        let m = FluxModel::lwr();
        let out = run(&m, &Params::canonical()).unwrap();
        assert!(all_pass(&out.claims), "claims: {:#?}", out.claims);
        assert!((out.times.t1 - 1.25).abs() <= 1e-6);
        assert!((out.times.t2 - 2.5).abs() <= 1e-6);
        assert!((out.times.t3 - 6.875).abs() <= 1e-6);
        assert!((out.times.t4 - 1.666667).abs() <= 1e-6);
        assert!((out.times.t6 - 7.619048).abs() <= 1e-6);
        assert!((out.f_entropy.total - 0.11).abs() <= 1e-6);
        assert!((out.f_constructed.total - 0.09).abs() <= 1e-6);
        assert!((out.family_optimal_flux - 0.2257895).abs() <= 1e-6);
        assert!((out.family_optimal_variation - 0.0815789).abs() <= 1e-6);
    }

    #[test]
    fn degenerate_level_collapses_to_the_fan_arrival() {
        // as phi -> f(a3) the drop time tends to t3 and the construction
        // degenerates into the entropy control
        let m = FluxModel::lwr();
        let p = Params::canonical();
        let times = node_times(&m, &p, m.f(p.right_state) - 1e-9).unwrap();
        let t6 = drop_time_formula(&m, &p, times.t4, m.f(p.right_state) - 1e-9);
        assert!((t6 - times.t3).abs() < 1e-6, "t6={t6} t3={}", times.t3);
    }

    #[test]
    fn auto_level_is_feasible() {
        let m = FluxModel::lwr();
        let mut p = Params::canonical();
        p.ctrl_flux = None;
        let out = run(&m, &p).unwrap();
        assert!(all_pass(&out.claims), "claims: {:#?}", out.claims);
        assert!(out.ctrl_flux > m.f(p.mid_state) && out.ctrl_flux < m.f(p.right_state));
        assert!(out.times.t3 < out.times.t6 && out.times.t6 < p.horizon);
    }

    #[test]
    fn rejects_flux_ordering_violation() {
        let m = FluxModel::lwr();
        let mut p = Params::canonical();
        p.right_state = 0.75; // f(a3) < f(a2) now
        assert!(matches!(run(&m, &p), Err(ScenarioError::ConstraintViolated(_))));
    }
}
