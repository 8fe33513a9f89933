//! Search for flux-maximizing controls of small flux variation.
//!
//! Candidates parameterize the incoming datum as a piecewise-constant flux
//! profile on a uniform time grid; the outgoing datum is derived junction-
//! consistently as the free-branch inverse of the realized incoming flux
//! trace, and the pair is verified through the coupled solver. Candidates
//! keep only flux maximizers whose variation does not exceed the entropy
//! level (the feasible set of the min-max problem).

use super::ScenarioError;
use crate::flux::{Branch, FluxModel};
use crate::fronttrack::{self, FrontKind, Side};
use crate::functionals::variation_functional;
use crate::junction::{self, CoupledSolution, JunctionError};
use crate::step::StepFunction;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMethod {
    Exhaustive,
    CoordinateDescent { restarts: usize },
}

#[derive(Debug, Clone)]
pub struct SearchSpec {
    /// Time pieces of the incoming flux profile.
    pub pieces: usize,
    /// Flux levels per piece.
    pub levels: usize,
    pub flux_lo: f64,
    pub flux_hi: f64,
    pub method: SearchMethod,
    pub seed: u64,
    /// Evaluation budget.
    pub budget: usize,
    /// Maximizer-membership tolerance on the flux integral. `None` picks a
    /// tight default: exact maximizers reproduce the entropy flux integral to
    /// rounding (both sides of the comparison come from the same engine),
    /// while any slack of discretization size admits near-maximizers whose
    /// variation undercuts the true minimum, because the variation functional
    /// is discontinuous across the exact-maximizer boundary (the terminal
    /// trace state switches when a shock arrival crosses the horizon).
    pub eps_j: Option<f64>,
}

fn tight_membership_eps(model: &FluxModel, horizon: f64) -> f64 {
    (1e-7 * model.max_flux().abs().max(1.0) * horizon.max(1.0)).max(1e-9)
}

#[derive(Debug)]
pub struct SearchOutcome {
    pub best_profile: Vec<f64>,
    pub best_variation: f64,
    pub best_j: f64,
    pub best_pair: Option<CoupledSolution>,
    pub reference_variation: f64,
    pub reference_j: f64,
    pub evaluated: usize,
    pub feasible: usize,
    /// `(evaluation index, variation, flux integral)` per feasible candidate.
    pub trajectory: Vec<(usize, f64, f64)>,
    /// A shock born at the node with |speed| <= 10 delta in the best pair.
    pub tangential_shock: bool,
}

struct Evaluator<'a> {
    model: &'a FluxModel,
    u0: &'a StepFunction,
    horizon: f64,
    delta: f64,
    ref_j: f64,
    ref_f: f64,
    eps_j: f64,
    eps_match: f64,
    evaluated: usize,
    feasible: usize,
    trajectory: Vec<(usize, f64, f64)>,
}

impl<'a> Evaluator<'a> {
    /// Evaluates one incoming flux profile; `None` when the candidate is not
    /// an admissible flux maximizer within the variation cap.
    fn eval(&mut self, profile: &[f64]) -> Result<Option<(f64, f64, CoupledSolution)>, ScenarioError> {
        self.evaluated += 1;
        let n = profile.len();
        let dt = self.horizon / n as f64;
        let breaks: Vec<f64> = (1..n).map(|i| i as f64 * dt).collect();
        let values: Vec<f64> = profile
            .iter()
            .map(|&q| self.model.branch_inverse(Branch::Congested, q).expect("grid level below max"))
            .collect();
        let k1 = StepFunction::from_unnormalized(0.0, self.horizon, &breaks, &values);
        let u1 = self.u0.restrict(f64::NEG_INFINITY, 0.0);
        let incoming = fronttrack::solve_ibvp_incoming(self.model, &u1, &k1, self.horizon, self.delta)?;
        let gamma1 = incoming.flux_trace(0.0, Side::Left);
        let k2 = gamma1.map(|q| self.model.branch_inverse(Branch::Free, q).expect("trace below max"));
        let pair = match junction::make_control(self.model, self.u0, &k1, &k2, self.horizon, self.delta, self.eps_match) {
            Ok(p) => p,
            Err(JunctionError::NotAdmissible { .. }) => return Ok(None),
            Err(JunctionError::Engine(e)) => return Err(e.into()),
        };
        if !junction::is_flux_maximizer(pair.control.j_value, self.ref_j, self.eps_j) {
            return Ok(None);
        }
        let (ti, to) = pair.terminal_node_states();
        let f = variation_functional(self.model, &pair.control.gamma, self.u0, ti, to, self.horizon).total;
        if f > self.ref_f + 1e-9 {
            return Ok(None);
        }
        self.feasible += 1;
        let j = pair.control.j_value;
        self.trajectory.push((self.evaluated, f, j));
        Ok(Some((f, j, pair)))
    }
}

pub fn run(
    model: &FluxModel,
    u0: &StepFunction,
    horizon: f64,
    delta: f64,
    spec: &SearchSpec,
) -> Result<SearchOutcome, ScenarioError> {
    if spec.pieces == 0 || spec.levels == 0 {
        return Err(ScenarioError::InvalidSearch("empty search grid".into()));
    }
    if !(spec.flux_lo <= spec.flux_hi) || spec.flux_hi > model.max_flux() + 1e-12 {
        return Err(ScenarioError::InvalidSearch(format!(
            "flux grid [{}, {}] must sit below the maximum {}",
            spec.flux_lo,
            spec.flux_hi,
            model.max_flux()
        )));
    }
    let levels: Vec<f64> = if spec.levels == 1 {
        vec![spec.flux_lo]
    } else {
        (0..spec.levels)
            .map(|i| spec.flux_lo + (spec.flux_hi - spec.flux_lo) * i as f64 / (spec.levels - 1) as f64)
            .collect()
    };

    let (entropy, full) = junction::entropy_control(model, u0, horizon, delta)?;
    let ref_f = variation_functional(
        model,
        &entropy.gamma,
        u0,
        full.terminal_node_state(Side::Left),
        full.terminal_node_state(Side::Right),
        horizon,
    )
    .total;
    let mut ev = Evaluator {
        model,
        u0,
        horizon,
        delta,
        ref_j: entropy.j_value,
        ref_f,
        eps_j: spec.eps_j.unwrap_or_else(|| tight_membership_eps(model, horizon)),
        eps_match: junction::default_eps_match(model),
        evaluated: 0,
        feasible: 0,
        trajectory: Vec::new(),
    };

    let mut best: Option<(f64, f64, Vec<f64>, CoupledSolution)> = None;
    let mut consider = |profile: &[f64], ev: &mut Evaluator| -> Result<(), ScenarioError> {
        if let Some((f, j, pair)) = ev.eval(profile)? {
            let better = best.as_ref().map_or(true, |(bf, ..)| f < *bf);
            if better {
                best = Some((f, j, profile.to_vec(), pair));
            }
        }
        Ok(())
    };

    match spec.method {
        SearchMethod::Exhaustive => {
            let space = levels.len().checked_pow(spec.pieces as u32).unwrap_or(usize::MAX);
            if space > spec.budget {
                return Err(ScenarioError::SearchBudgetExceeded { budget: spec.budget, space });
            }
            let mut idx = vec![0usize; spec.pieces];
            loop {
                let profile: Vec<f64> = idx.iter().map(|&i| levels[i]).collect();
                consider(&profile, &mut ev)?;
                // odometer increment
                let mut p = 0;
                loop {
                    idx[p] += 1;
                    if idx[p] < levels.len() {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                    if p == spec.pieces {
                        break;
                    }
                }
                if p == spec.pieces {
                    break;
                }
            }
        }
        SearchMethod::CoordinateDescent { restarts } => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for _ in 0..restarts.max(1) {
                let mut idx: Vec<usize> = (0..spec.pieces).map(|_| rng.gen_range(0..levels.len())).collect();
                let mut current: Option<f64> = None;
                loop {
                    let mut improved = false;
                    for p in 0..spec.pieces {
                        let keep = idx[p];
                        let mut best_here = (current, keep);
                        for l in 0..levels.len() {
                            if ev.evaluated >= spec.budget {
                                return Err(ScenarioError::SearchBudgetExceeded {
                                    budget: spec.budget,
                                    space: ev.evaluated + 1,
                                });
                            }
                            idx[p] = l;
                            let profile: Vec<f64> = idx.iter().map(|&i| levels[i]).collect();
                            if let Some((f, j, pair)) = ev.eval(&profile)? {
                                let better_global = best.as_ref().map_or(true, |(bf, ..)| f < *bf);
                                if better_global {
                                    best = Some((f, j, profile.clone(), pair));
                                }
                                if best_here.0.map_or(true, |c| f < c) {
                                    best_here = (Some(f), l);
                                }
                            }
                        }
                        idx[p] = best_here.1;
                        if best_here.0 < current || (current.is_none() && best_here.0.is_some()) {
                            current = best_here.0;
                            improved = true;
                        }
                    }
                    if !improved {
                        break;
                    }
                }
            }
        }
    }

    let tangential_shock = best
        .as_ref()
        .map(|(_, _, _, pair)| has_tangential_node_shock(pair, delta))
        .unwrap_or(false);
    let (best_variation, best_j, best_profile, best_pair) = match best {
        Some((f, j, p, pair)) => (f, j, p, Some(pair)),
        None => (f64::INFINITY, f64::NAN, Vec::new(), None),
    };
    Ok(SearchOutcome {
        best_profile,
        best_variation,
        best_j,
        best_pair,
        reference_variation: ref_f,
        reference_j: entropy.j_value,
        evaluated: ev.evaluated,
        feasible: ev.feasible,
        trajectory: ev.trajectory,
        tangential_shock,
    })
}

/// True when either half-line solution carries a shock born at the node with
/// near-zero speed (the signature of a tangentially emerging discontinuity).
pub fn has_tangential_node_shock(pair: &CoupledSolution, delta: f64) -> bool {
    for sol in [&pair.incoming, &pair.outgoing] {
        for &id in &sol.node_born_fronts() {
            let f = &sol.fronts[id];
            if matches!(f.kind, FrontKind::Shock) && f.t_birth > 0.0 && f.speed.abs() <= 10.0 * delta {
                return true;
            }
        }
    }
    false
}
