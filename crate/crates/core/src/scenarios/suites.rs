//! Seeded randomized property suites.
//!
//! Each suite returns a report with per-check counts and the worst margin
//! (positive margins mean slack, negative ones are failures). All randomness
//! comes from a caller-supplied 64-bit seed.

use super::{fractal_datum, shock_rarefaction, straddling_jumps, ScenarioError};
use crate::characteristics::{divergence_residual, divergence_residual_coupled, residual_scale};
use crate::flux::{Branch, FluxModel};
use crate::fronttrack::{self, Side};
use crate::functionals::{bv_trace_bound, variation_functional};
use crate::junction::{self, JunctionError};
use crate::step::{Monotonicity, StepFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub name: String,
    pub seed: u64,
    pub checks: usize,
    pub failures: usize,
    /// Smallest slack observed across all checks.
    pub worst_margin: f64,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(name: &str, seed: u64) -> Self {
        SuiteReport {
            name: name.to_string(),
            seed,
            checks: 0,
            failures: 0,
            worst_margin: f64::INFINITY,
            notes: Vec::new(),
        }
    }

    fn record(&mut self, margin: f64, what: impl Fn() -> String) {
        self.checks += 1;
        if margin < self.worst_margin {
            self.worst_margin = margin;
        }
        if margin < 0.0 {
            self.failures += 1;
            self.notes.push(what());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0 && self.checks > 0
    }
}

fn sorted_distinct_breaks(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64, min_gap: f64) -> Vec<f64> {
    let mut breaks: Vec<f64>;
    loop {
        breaks = (0..n).map(|_| rng.gen_range(lo..hi)).collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if breaks.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            return breaks;
        }
    }
}

/// Random canonical step datum on the whole line with values in `(0.05, 0.95)`.
pub fn random_datum(rng: &mut ChaCha8Rng, max_pieces: usize) -> StepFunction {
    let n = rng.gen_range(1..=max_pieces);
    let breaks = sorted_distinct_breaks(rng, n - 1, -2.0, 2.0, 0.05);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        loop {
            let v: f64 = rng.gen_range(0.05..0.95);
            if values.last().map_or(true, |&p: &f64| (v - p).abs() > 0.02) {
                values.push(v);
                break;
            }
        }
    }
    StepFunction::new(f64::NEG_INFINITY, f64::INFINITY, breaks, values).unwrap()
}

/// Random monotone step datum.
pub fn random_monotone_datum(rng: &mut ChaCha8Rng, max_pieces: usize, dir: Monotonicity) -> StepFunction {
    let n = rng.gen_range(2..=max_pieces);
    let breaks = sorted_distinct_breaks(rng, n - 1, -1.5, 1.5, 0.05);
    let mut values: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    if matches!(dir, Monotonicity::NonIncreasing) {
        values.reverse();
    }
    values.dedup_by(|a, b| (*a - *b).abs() < 0.02);
    while values.len() < breaks.len() + 1 {
        values.push(*values.last().unwrap() + if matches!(dir, Monotonicity::NonIncreasing) { -0.02 } else { 0.02 });
    }
    let values: Vec<f64> = values.iter().map(|v| v.clamp(0.02, 0.98)).collect();
    StepFunction::from_unnormalized(f64::NEG_INFINITY, f64::INFINITY, &breaks, &values[..breaks.len() + 1])
}

/// Random piecewise-constant flux profile bounded by `q_cap`.
fn random_flux_profile(rng: &mut ChaCha8Rng, horizon: f64, q_cap: f64) -> StepFunction {
    let n = rng.gen_range(1..=4);
    let breaks = sorted_distinct_breaks(rng, n - 1, 0.1 * horizon, 0.9 * horizon, 0.05 * horizon);
    let values: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.2) {
                q_cap
            } else {
                rng.gen_range(0.2 * q_cap..q_cap)
            }
        })
        .collect();
    StepFunction::from_unnormalized(0.0, horizon, &breaks, &values)
}

/// Flux maximality: every admissible control yields at most the entropy flux
/// integral. Controls are sampled as flux profiles capped by the smallest
/// datum flux, which makes them admissible by construction; each instance is
/// still re-verified through the coupled solver.
pub fn maximality(seed: u64, count: usize) -> Result<SuiteReport, ScenarioError> {
    let model = FluxModel::lwr();
    let horizon = 2.0;
    let delta = 1e-3;
    let per_datum = 5usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new("maximality", seed);
    let eps_j = junction::default_eps_j(&model, horizon, delta);
    while report.checks < count {
        let u0 = random_datum(&mut rng, 6);
        let (entropy, _full) = junction::entropy_control(&model, &u0, horizon, delta)?;
        let q_cap = u0.values().iter().map(|&v| model.f(v)).fold(f64::INFINITY, f64::min);
        for _ in 0..per_datum.min(count - report.checks) {
            let q = random_flux_profile(&mut rng, horizon, q_cap);
            let k1 = q.map(|v| model.branch_inverse(Branch::Congested, v).unwrap());
            let k2 = q.map(|v| model.branch_inverse(Branch::Free, v).unwrap());
            match junction::make_control(&model, &u0, &k1, &k2, horizon, delta, junction::default_eps_match(&model)) {
                Ok(pair) => {
                    let margin = entropy.j_value + eps_j - pair.control.j_value;
                    report.record(margin, || {
                        format!("J={} exceeds entropy J={}", pair.control.j_value, entropy.j_value)
                    });
                }
                Err(JunctionError::NotAdmissible { max_mismatch, worst_time }) => {
                    report.record(-max_mismatch, || {
                        format!("capped profile should be admissible (mismatch {max_mismatch} at {worst_time})")
                    });
                }
                Err(JunctionError::Engine(e)) => return Err(e.into()),
            }
        }
    }
    Ok(report)
}

pub struct MonotoneOutcome {
    pub minimality: SuiteReport,
    pub trace_monotone: SuiteReport,
    pub survivors: usize,
    pub rejected: usize,
}

/// Monotone minimality: over monotone data, no sampled flux maximizer beats
/// the entropy control's flux variation; and the entropy node flux trace is
/// monotone (non-increasing for non-decreasing data and conversely).
pub fn monotone(seed: u64, count_each: usize) -> Result<MonotoneOutcome, ScenarioError> {
    let model = FluxModel::lwr();
    let horizon = 2.5;
    let delta = 1e-3;
    let eps_j = junction::default_eps_j(&model, horizon, delta);
    let eps_f = (4.0 * delta).max(1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut minimality = SuiteReport::new("monotone-minimality", seed);
    let mut trace_monotone = SuiteReport::new("monotone-trace", seed);
    let mut survivors = 0usize;
    let mut rejected = 0usize;

    for dir in [Monotonicity::NonDecreasing, Monotonicity::NonIncreasing] {
        for _ in 0..count_each {
            let u0 = random_monotone_datum(&mut rng, 6, dir);
            let (entropy, full) = junction::entropy_control(&model, &u0, horizon, delta)?;
            let f_ref = variation_functional(
                &model,
                &entropy.gamma,
                &u0,
                full.terminal_node_state(Side::Left),
                full.terminal_node_state(Side::Right),
                horizon,
            )
            .total;

            // node flux trace monotonicity, opposite to the datum direction
            let expect = match dir {
                Monotonicity::NonDecreasing => Monotonicity::NonIncreasing,
                Monotonicity::NonIncreasing => Monotonicity::NonDecreasing,
            };
            let viol = entropy.gamma.monotonicity_violation(expect);
            let allowance = delta * model.max_wave_speed() + 1e-12;
            trace_monotone.record(allowance - viol, || {
                format!("flux trace violates monotonicity by {viol}")
            });

            // candidate maximizers: the entropy pair plus spliced dips
            let q_cap = u0.values().iter().map(|&v| model.f(v)).fold(f64::INFINITY, f64::min);
            let mut candidates = vec![(entropy.k1.clone(), entropy.k2.clone())];
            for _ in 0..3 {
                let s1: f64 = rng.gen_range(0.05 * horizon..0.6 * horizon);
                let s2: f64 = s1 + rng.gen_range(0.05 * horizon..0.3 * horizon);
                let q: f64 = rng.gen_range(0.3 * q_cap..q_cap);
                let lvl1 = StepFunction::constant(0.0, horizon, model.branch_inverse(Branch::Congested, q).unwrap());
                let lvl2 = StepFunction::constant(0.0, horizon, model.branch_inverse(Branch::Free, q).unwrap());
                candidates.push((entropy.k1.splice(s1, s2, &lvl1), entropy.k2.splice(s1, s2, &lvl2)));
            }
            for (k1, k2) in candidates {
                let pair = match junction::make_control(&model, &u0, &k1, &k2, horizon, delta, junction::default_eps_match(&model)) {
                    Ok(p) => p,
                    Err(JunctionError::NotAdmissible { .. }) => {
                        rejected += 1;
                        continue;
                    }
                    Err(JunctionError::Engine(e)) => return Err(e.into()),
                };
                if !junction::is_flux_maximizer(pair.control.j_value, entropy.j_value, eps_j) {
                    rejected += 1;
                    continue;
                }
                survivors += 1;
                let (ti, to) = pair.terminal_node_states();
                let f_c = variation_functional(&model, &pair.control.gamma, &u0, ti, to, horizon).total;
                minimality.record(f_c - f_ref + eps_f, || {
                    format!("maximizer with F={f_c} beats entropy F={f_ref}")
                });
            }
        }
    }
    Ok(MonotoneOutcome { minimality, trace_monotone, survivors, rejected })
}

/// Trace-variation bound on randomized outgoing problems with `tv(u0) <= 2`
/// and `tv(f∘k) <= 0.5`, plus three deterministic instances.
pub fn bv_bound(seed: u64, count: usize) -> Result<SuiteReport, ScenarioError> {
    let model = FluxModel::lwr();
    let horizon = 2.0;
    let delta = 1e-3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new("bvbound", seed);

    // deterministic instances: compatible constants, rarefaction datum,
    // truncated fractal datum on the parabolic flux
    {
        let u0 = StepFunction::constant(0.0, f64::INFINITY, 0.3);
        let k = StepFunction::constant(0.0, horizon, 0.3);
        let sol = fronttrack::solve_ibvp_outgoing(&model, &u0, &k, horizon, delta)?;
        let rep = bv_trace_bound(&model, &u0, &k, &sol).expect("hypotheses hold");
        report.record(rep.rhs + 1e-9 - rep.lhs, || "constant instance".into());

        let u0 = StepFunction::new(0.0, f64::INFINITY, vec![0.5], vec![0.7, 0.6]).unwrap();
        let sol = fronttrack::solve_ibvp_outgoing(&model, &u0, &k, horizon, delta)?;
        let rep = bv_trace_bound(&model, &u0, &k, &sol).expect("hypotheses hold");
        report.record(rep.rhs + 1e-9 - rep.lhs, || "rarefaction instance".into());

        let fr = fractal_datum::run(6, delta)?;
        let mfr = fractal_datum::model();
        let u0 = fractal_datum::initial_datum(6);
        let k0 = StepFunction::constant(0.0, 4.0 / 3.0, 0.0);
        let rep = bv_trace_bound(&mfr, &u0, &k0, &fr.solution).expect("hypotheses hold");
        report.record(rep.rhs + 1e-9 - rep.lhs, || "fractal instance".into());
        // sharpness: the trace variation really is of size 3/8 per level
        report.record(fr.tv_flux_trace - (0.375 * 6.0 - 10.0 * delta), || {
            format!("fractal trace variation {} below the per-level bound", fr.tv_flux_trace)
        });
    }

    while report.checks < count {
        // bounded-variation data: a short random walk of values
        let n = rng.gen_range(2..=6);
        let breaks = sorted_distinct_breaks(&mut rng, n - 1, 0.1, 3.0, 0.05);
        let mut values = vec![rng.gen_range(0.1..0.9)];
        for _ in 1..n {
            let step: f64 = rng.gen_range(-0.33..0.33);
            let v: f64 = values.last().unwrap() + step;
            values.push(v.clamp(0.02, 0.98));
        }
        let u0 = StepFunction::from_unnormalized(0.0, f64::INFINITY, &breaks, &values);
        if u0.total_variation() > 2.0 {
            continue;
        }
        let kn = rng.gen_range(1..=3);
        let kb = sorted_distinct_breaks(&mut rng, kn - 1, 0.1 * horizon, 0.9 * horizon, 0.05);
        let mut kq = vec![rng.gen_range(0.01..0.24)];
        for _ in 1..kn {
            let step: f64 = rng.gen_range(-0.2..0.2);
            let q: f64 = kq.last().unwrap() + step;
            kq.push(q.clamp(0.005, 0.245));
        }
        let kv: Vec<f64> = kq
            .iter()
            .map(|&q| model.branch_inverse(Branch::Free, q).unwrap())
            .collect();
        let k = StepFunction::from_unnormalized(0.0, horizon, &kb, &kv);
        if k.map(|v| model.f(v)).total_variation() > 0.5 {
            continue;
        }
        let sol = fronttrack::solve_ibvp_outgoing(&model, &u0, &k, horizon, delta)?;
        let rep = bv_trace_bound(&model, &u0, &k, &sol).expect("hypotheses hold by construction");
        report.record(rep.rhs + 1e-9 - rep.lhs, || {
            format!("bound violated: lhs={} rhs={}", rep.lhs, rep.rhs)
        });
    }
    Ok(report)
}

/// Divergence-balance residuals on random rectangles across the two worked
/// scenarios (entropy solutions and constructed pairs).
pub fn conservation(seed: u64, count: usize) -> Result<SuiteReport, ScenarioError> {
    let model = FluxModel::lwr();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport::new("conservation", seed);

    let sr = shock_rarefaction::run(&model, &shock_rarefaction::Params::canonical())?;
    let sj = straddling_jumps::run(&model, &straddling_jumps::Params::canonical())?;

    let fulls = [(&sr.entropy_full, 3.0), (&sj.entropy_full, 8.0)];
    let pairs = [(&sr.constructed, 3.0), (&sj.constructed, 8.0)];
    while report.checks < count {
        for (sol, horizon) in fulls {
            let t1: f64 = rng.gen_range(0.0..0.8 * horizon);
            let t2: f64 = rng.gen_range(t1 + 0.05 * horizon..horizon);
            let a: f64 = rng.gen_range(-2.5..1.0);
            let b: f64 = rng.gen_range(a + 0.2..3.0);
            let r = divergence_residual(sol, t1, t2, a, b).abs();
            let tol = 1e-8 * residual_scale(&model, t1, t2, a, b);
            report.record(tol - r, || format!("full-line residual {r} on [{t1},{t2}]x[{a},{b}]"));
        }
        for (pair, horizon) in pairs {
            let t1: f64 = rng.gen_range(0.0..0.8 * horizon);
            let t2: f64 = rng.gen_range(t1 + 0.05 * horizon..horizon);
            let a: f64 = rng.gen_range(-2.5..-0.1);
            let b: f64 = rng.gen_range(0.1..2.5);
            let r = divergence_residual_coupled(pair, t1, t2, a, b).abs();
            let tol = 1e-8 * residual_scale(&model, t1, t2, a, b);
            report.record(tol - r, || format!("coupled residual {r} on [{t1},{t2}]x[{a},{b}]"));
        }
    }
    Ok(report)
}
