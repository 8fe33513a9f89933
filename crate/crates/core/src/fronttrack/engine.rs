//! The event loop: collision detection, boundary absorption/emission and
//! datum jumps, in deterministic time order.

use super::{Domain, Event, EventKind, Front, FrontKind, FtSolution};
use crate::flux::{FluxError, FluxModel};
use crate::riemann::{self, BoundaryResolution, RiemannError, WaveFan};
use crate::step::{StepError, StepFunction};
use thiserror::Error;

pub const DEFAULT_MAX_EVENTS: usize = 2_000_000;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid solver input: {0}")]
    InvalidInput(String),
    #[error("state {u} escaped the working range")]
    StateEscapedDomain { u: f64 },
    #[error("event budget of {limit} exceeded")]
    EventCountExceeded { limit: usize },
    #[error(transparent)]
    Riemann(#[from] RiemannError),
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Full problem description for one solve.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub domain: Domain,
    pub initial: StepFunction,
    /// Boundary datum on `(0, horizon)`; required for half-line domains and
    /// normalized onto the branch with characteristics entering the domain.
    pub boundary: Option<StepFunction>,
    pub horizon: f64,
    pub delta: f64,
    pub max_events: usize,
}

impl ProblemSpec {
    pub fn cauchy(initial: StepFunction, horizon: f64, delta: f64) -> Self {
        ProblemSpec {
            domain: Domain::FullLine,
            initial,
            boundary: None,
            horizon,
            delta,
            max_events: DEFAULT_MAX_EVENTS,
        }
    }
}

/// Entropy solution of the Cauchy problem on the whole line.
pub fn solve_cauchy(
    model: &FluxModel,
    initial: &StepFunction,
    horizon: f64,
    delta: f64,
) -> Result<FtSolution, EngineError> {
    solve(model, ProblemSpec::cauchy(initial.clone(), horizon, delta))
}

/// Entropy solution of the incoming-road problem on `x < 0` with relaxed
/// Dirichlet datum `k` at `x = 0`. Datum values below the critical state are
/// replaced by their companions (same flux, entering branch).
pub fn solve_ibvp_incoming(
    model: &FluxModel,
    initial: &StepFunction,
    k: &StepFunction,
    horizon: f64,
    delta: f64,
) -> Result<FtSolution, EngineError> {
    let k = normalize_boundary(model, k, Domain::IncomingHalfLine)?;
    solve(
        model,
        ProblemSpec {
            domain: Domain::IncomingHalfLine,
            initial: initial.restrict(f64::NEG_INFINITY, 0.0),
            boundary: Some(k),
            horizon,
            delta,
            max_events: DEFAULT_MAX_EVENTS,
        },
    )
}

/// Mirror of [`solve_ibvp_incoming`] for the outgoing road `x > 0`.
pub fn solve_ibvp_outgoing(
    model: &FluxModel,
    initial: &StepFunction,
    k: &StepFunction,
    horizon: f64,
    delta: f64,
) -> Result<FtSolution, EngineError> {
    let k = normalize_boundary(model, k, Domain::OutgoingHalfLine)?;
    solve(
        model,
        ProblemSpec {
            domain: Domain::OutgoingHalfLine,
            initial: initial.restrict(0.0, f64::INFINITY),
            boundary: Some(k),
            horizon,
            delta,
            max_events: DEFAULT_MAX_EVENTS,
        },
    )
}

/// Replaces datum values on the wrong side of the critical state by their
/// companion with equal flux; this does not change the solution.
pub fn normalize_boundary(
    model: &FluxModel,
    k: &StepFunction,
    domain: Domain,
) -> Result<StepFunction, EngineError> {
    let theta = model.theta();
    let mut vals = Vec::with_capacity(k.values().len());
    for &v in k.values() {
        if !model.contains(v) {
            return Err(EngineError::StateEscapedDomain { u: v });
        }
        let needs_flip = match domain {
            Domain::IncomingHalfLine => v < theta,
            Domain::OutgoingHalfLine => v > theta,
            Domain::FullLine => false,
        };
        vals.push(if needs_flip { model.companion(v)? } else { v });
    }
    Ok(StepFunction::new(k.lo(), k.hi(), k.breaks().to_vec(), vals)?)
}

pub fn solve(model: &FluxModel, spec: ProblemSpec) -> Result<FtSolution, EngineError> {
    if !(spec.horizon > 0.0) || !spec.horizon.is_finite() {
        return Err(EngineError::InvalidInput(format!("horizon must be positive, got {}", spec.horizon)));
    }
    if !(spec.delta > 0.0) || !spec.delta.is_finite() {
        return Err(EngineError::InvalidInput(format!("delta must be positive, got {}", spec.delta)));
    }
    if spec.domain.is_half_line() && spec.boundary.is_none() {
        return Err(EngineError::InvalidInput("half-line problems need a boundary datum".into()));
    }
    for &v in spec.initial.values() {
        if !model.contains(v) {
            return Err(EngineError::StateEscapedDomain { u: v });
        }
    }
    let mut eng = Engine {
        model,
        domain: spec.domain,
        horizon: spec.horizon,
        delta: spec.delta,
        boundary: spec.boundary,
        initial: spec.initial,
        fronts: Vec::new(),
        active: Vec::new(),
        events: Vec::new(),
        uniform_after: Vec::new(),
        t_now: 0.0,
        k_pos: 0,
        max_events: spec.max_events,
        tie_eps: 1e-12 * spec.horizon.max(1.0),
        pos_tol: 1e-11 * (model.max_wave_speed() * spec.horizon).max(1.0),
    };
    eng.init()?;
    eng.run()?;
    Ok(FtSolution {
        model: model.clone(),
        domain: eng.domain,
        horizon: eng.horizon,
        delta: eng.delta,
        fronts: eng.fronts,
        events: eng.events,
        initial: eng.initial,
        boundary: eng.boundary,
        uniform_after: eng.uniform_after,
    })
}

struct Engine<'a> {
    model: &'a FluxModel,
    domain: Domain,
    horizon: f64,
    delta: f64,
    boundary: Option<StepFunction>,
    initial: StepFunction,
    fronts: Vec<Front>,
    /// Alive fronts, ordered left to right.
    active: Vec<usize>,
    events: Vec<Event>,
    uniform_after: Vec<(f64, f64)>,
    t_now: f64,
    /// Number of boundary breakpoints already applied.
    k_pos: usize,
    max_events: usize,
    tie_eps: f64,
    pos_tol: f64,
}

impl<'a> Engine<'a> {
    fn new_front(
        &mut self,
        kind: FrontKind,
        left: f64,
        right: f64,
        speed: f64,
        t: f64,
        x: f64,
    ) -> Result<usize, EngineError> {
        for u in [left, right] {
            if !self.model.contains(u) {
                return Err(EngineError::StateEscapedDomain { u });
            }
        }
        // Snap roundoff-level speeds to an exact zero so stationary shocks
        // (companion-state jumps) stay put; the Rankine-Hugoniot defect this
        // introduces is below 1e-13 in speed.
        let speed = if speed.abs() < 1e-13 * self.model.max_wave_speed().max(1.0) {
            0.0
        } else {
            speed
        };
        let id = self.fronts.len();
        self.fronts.push(Front {
            id,
            kind,
            left,
            right,
            speed,
            t_birth: t,
            x_birth: x,
            end: None,
        });
        Ok(id)
    }

    /// Turns a wave fan into fronts born at `(t, x)`, splitting rarefactions
    /// into fan fronts of strength at most `delta`. Returned ids are ordered
    /// left to right (ascending speed).
    fn materialize(&mut self, fan: &WaveFan, t: f64, x: f64) -> Result<Vec<usize>, EngineError> {
        let mut out = Vec::new();
        match *fan {
            WaveFan::Constant { .. } => {}
            WaveFan::Shock { ul, ur, speed } => {
                out.push(self.new_front(FrontKind::Shock, ul, ur, speed, t, x)?);
            }
            WaveFan::Rarefaction { ul, ur, .. } => {
                let n = (((ul - ur) / self.delta).ceil() as usize).max(1);
                let mut prev = ul;
                for i in 1..=n {
                    let frac = i as f64 / n as f64;
                    let w = if i == n { ur } else { ul * (1.0 - frac) + ur * frac };
                    let speed = self.model.shock_speed(prev, w)?;
                    out.push(self.new_front(FrontKind::FanFront, prev, w, speed, t, x)?);
                    prev = w;
                }
            }
        }
        Ok(out)
    }

    fn pos(&self, id: usize, t: f64) -> f64 {
        self.fronts[id].position(t)
    }

    fn uniform_now(&self) -> f64 {
        self.uniform_after
            .last()
            .map(|&(_, v)| v)
            .unwrap_or_else(|| self.initial.first_value())
    }

    fn boundary_adjacent(&self) -> f64 {
        match self.domain {
            Domain::IncomingHalfLine => self
                .active
                .last()
                .map(|&i| self.fronts[i].right)
                .unwrap_or_else(|| self.uniform_now()),
            Domain::OutgoingHalfLine => self
                .active
                .first()
                .map(|&i| self.fronts[i].left)
                .unwrap_or_else(|| self.uniform_now()),
            Domain::FullLine => unreachable!("no boundary on the full line"),
        }
    }

    fn init(&mut self) -> Result<(), EngineError> {
        let breaks: Vec<f64> = self.initial.breaks().to_vec();
        let values: Vec<f64> = self.initial.values().to_vec();
        for (j, &x) in breaks.iter().enumerate() {
            let fan = riemann::solve(self.model, values[j], values[j + 1])?;
            let born = self.materialize(&fan, 0.0, x)?;
            self.active.extend(born);
        }
        if self.active.is_empty() {
            self.uniform_after.push((0.0, self.initial.first_value()));
        }
        if self.domain.is_half_line() {
            self.resolve_boundary(EventKind::BoundaryEmission)?;
        }
        Ok(())
    }

    /// Applies the current boundary datum against the trace region and emits
    /// the entering waves. Logs an event of the given kind when something
    /// happened (always for datum jumps).
    ///
    /// The datum is read by consumed-jump index, not by time: a jump handled
    /// inside the tie window must already be in force even when `t_now` sits
    /// a few ulps before the stored breakpoint.
    fn resolve_boundary(&mut self, kind: EventKind) -> Result<(), EngineError> {
        let k = self
            .boundary
            .as_ref()
            .expect("resolve_boundary on half-line only")
            .values()[self.k_pos];
        let interior = self.boundary_adjacent();
        let res: BoundaryResolution = match self.domain {
            Domain::IncomingHalfLine => riemann::resolve_boundary_incoming(self.model, k, interior)?,
            Domain::OutgoingHalfLine => riemann::resolve_boundary_outgoing(self.model, k, interior)?,
            Domain::FullLine => unreachable!(),
        };
        let born = match res.emitted {
            Some(fan) => self.materialize(&fan, self.t_now, 0.0)?,
            None => Vec::new(),
        };
        if !born.is_empty() {
            match self.domain {
                Domain::IncomingHalfLine => self.active.extend(born.iter().copied()),
                Domain::OutgoingHalfLine => {
                    let mut merged = born.clone();
                    merged.extend(self.active.iter().copied());
                    self.active = merged;
                }
                Domain::FullLine => unreachable!(),
            }
            self.events.push(Event {
                time: self.t_now,
                kind,
                position: 0.0,
                absorbed: Vec::new(),
                born,
            });
        } else if kind == EventKind::BoundaryJump {
            self.events.push(Event {
                time: self.t_now,
                kind,
                position: 0.0,
                absorbed: Vec::new(),
                born,
            });
        }
        Ok(())
    }

    /// Earliest collision time over adjacent active pairs, plus the pair set
    /// achieving it within the tie window.
    fn collision_candidates(&self) -> (f64, Vec<usize>) {
        let mut best = f64::INFINITY;
        let mut times = vec![f64::INFINITY; self.active.len().saturating_sub(1)];
        for w in 0..self.active.len().saturating_sub(1) {
            let a = &self.fronts[self.active[w]];
            let b = &self.fronts[self.active[w + 1]];
            let ds = a.speed - b.speed;
            if ds <= 0.0 {
                continue;
            }
            let gap = (b.position(self.t_now) - a.position(self.t_now)).max(0.0);
            let tc = (self.t_now + gap / ds).max(self.t_now);
            times[w] = tc;
            if tc < best {
                best = tc;
            }
        }
        let pairs = times
            .iter()
            .enumerate()
            .filter(|(_, &t)| t <= best + self.tie_eps)
            .map(|(w, _)| w)
            .collect();
        (best, pairs)
    }

    /// Earliest time the outermost front reaches the node.
    fn arrival_candidate(&self) -> f64 {
        match self.domain {
            Domain::IncomingHalfLine => {
                if let Some(&last) = self.active.last() {
                    let f = &self.fronts[last];
                    let p = f.position(self.t_now);
                    if p >= -self.pos_tol && f.speed >= 0.0 {
                        return self.t_now;
                    }
                    if f.speed > 0.0 {
                        return (self.t_now + (0.0 - p) / f.speed).max(self.t_now);
                    }
                }
                f64::INFINITY
            }
            Domain::OutgoingHalfLine => {
                if let Some(&first) = self.active.first() {
                    let f = &self.fronts[first];
                    let p = f.position(self.t_now);
                    if p <= self.pos_tol && f.speed <= 0.0 {
                        return self.t_now;
                    }
                    if f.speed < 0.0 {
                        return (self.t_now + p / (-f.speed)).max(self.t_now);
                    }
                }
                f64::INFINITY
            }
            Domain::FullLine => f64::INFINITY,
        }
    }

    fn next_k_jump(&self) -> f64 {
        match &self.boundary {
            Some(k) if self.k_pos < k.breaks().len() => k.breaks()[self.k_pos],
            _ => f64::INFINITY,
        }
    }

    fn run(&mut self) -> Result<(), EngineError> {
        let mut steps = 0usize;
        loop {
            steps += 1;
            if steps > self.max_events {
                return Err(EngineError::EventCountExceeded { limit: self.max_events });
            }
            let (t_col, col_pairs) = self.collision_candidates();
            let t_arr = self.arrival_candidate();
            let t_k = self.next_k_jump();
            let t_next = t_col.min(t_arr).min(t_k);
            if t_next > self.horizon - self.tie_eps {
                break;
            }
            self.t_now = t_next.max(self.t_now);

            let mut removed = false;
            if t_col <= t_next + self.tie_eps && !col_pairs.is_empty() {
                self.process_collisions(&col_pairs)?;
                removed = true;
            }
            let mut boundary_dirty = false;
            if self.domain.is_half_line() {
                boundary_dirty |= self.absorb_arrivals();
            }
            let mut jumped = false;
            if t_k <= self.t_now + self.tie_eps {
                if let Some(k) = &self.boundary {
                    while self.k_pos < k.breaks().len() && k.breaks()[self.k_pos] <= self.t_now + self.tie_eps {
                        self.k_pos += 1;
                    }
                }
                jumped = true;
            }
            if boundary_dirty || jumped {
                let kind = if jumped { EventKind::BoundaryJump } else { EventKind::BoundaryEmission };
                self.resolve_boundary(kind)?;
            }
            let _ = removed;
            if self.active.is_empty() && self.uniform_after.last().map(|&(t, _)| t) != Some(self.t_now) {
                // value recorded by the phase that emptied the list
            }
        }
        Ok(())
    }

    /// Kills the colliding runs and re-solves one Riemann problem per run
    /// between the outermost states. `pairs` are adjacency indices into the
    /// current active list, ascending.
    fn process_collisions(&mut self, pairs: &[usize]) -> Result<(), EngineError> {
        // Group consecutive pair indices into runs [w0 ..= w1], touching
        // fronts active[w0 ..= w1+1].
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &w in pairs {
            match runs.last_mut() {
                Some((_, hi)) if *hi + 1 == w => *hi = w,
                _ => runs.push((w, w)),
            }
        }
        let mut new_active: Vec<usize> = Vec::with_capacity(self.active.len());
        let mut cursor = 0usize;
        for &(w0, w1) in &runs {
            let first = w0;
            let last = w1 + 1;
            new_active.extend_from_slice(&self.active[cursor..first]);
            let ul = self.fronts[self.active[first]].left;
            let ur = self.fronts[self.active[last]].right;
            let x_c = self.pos(self.active[first], self.t_now);
            let absorbed: Vec<usize> = self.active[first..=last].to_vec();
            for &id in &absorbed {
                self.fronts[id].end = Some((self.t_now, x_c));
            }
            let fan = riemann::solve(self.model, ul, ur)?;
            let born = self.materialize(&fan, self.t_now, x_c)?;
            new_active.extend(born.iter().copied());
            self.events.push(Event {
                time: self.t_now,
                kind: EventKind::Collision,
                position: x_c,
                absorbed,
                born,
            });
            cursor = last + 1;
        }
        new_active.extend_from_slice(&self.active[cursor..]);
        self.active = new_active;
        if self.active.is_empty() {
            let v = self.fronts[self.events.last().unwrap().absorbed[0]].left;
            self.uniform_after.push((self.t_now, v));
        }
        Ok(())
    }

    /// Kills the contiguous batch of fronts sitting at the node and reports
    /// whether the boundary must be re-resolved.
    fn absorb_arrivals(&mut self) -> bool {
        let mut absorbed: Vec<usize> = Vec::new();
        match self.domain {
            Domain::IncomingHalfLine => {
                while let Some(&last) = self.active.last() {
                    let f = &self.fronts[last];
                    if f.position(self.t_now) >= -self.pos_tol && f.speed >= 0.0 {
                        absorbed.push(last);
                        self.active.pop();
                    } else {
                        break;
                    }
                }
            }
            Domain::OutgoingHalfLine => {
                let mut n = 0;
                while n < self.active.len() {
                    let f = &self.fronts[self.active[n]];
                    if f.position(self.t_now) <= self.pos_tol && f.speed <= 0.0 {
                        absorbed.push(self.active[n]);
                        n += 1;
                    } else {
                        break;
                    }
                }
                self.active.drain(0..n);
            }
            Domain::FullLine => {}
        }
        if absorbed.is_empty() {
            return false;
        }
        // domain-side state of the outermost absorbed front
        let survivor = match self.domain {
            Domain::IncomingHalfLine => self.fronts[*absorbed.last().unwrap()].left,
            _ => self.fronts[*absorbed.last().unwrap()].right,
        };
        for &id in &absorbed {
            self.fronts[id].end = Some((self.t_now, 0.0));
        }
        self.events.push(Event {
            time: self.t_now,
            kind: EventKind::FrontAbsorbedAtBoundary,
            position: 0.0,
            absorbed,
            born: Vec::new(),
        });
        if self.active.is_empty() {
            self.uniform_after.push((self.t_now, survivor));
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronttrack::Side;

    fn lwr() -> FluxModel {
        FluxModel::lwr()
    }

    fn full_line(breaks: &[f64], values: &[f64]) -> StepFunction {
        StepFunction::new(f64::NEG_INFINITY, f64::INFINITY, breaks.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn constant_datum_has_no_fronts() {
        let m = lwr();
        let sol = solve_cauchy(&m, &full_line(&[], &[0.3]), 5.0, 1e-3).unwrap();
        assert!(sol.fronts.is_empty());
        assert_eq!(sol.state_at(2.0, 1.3, Side::Left), 0.3);
        assert_eq!(sol.snapshot(4.0).values(), &[0.3]);
        assert_eq!(sol.trace(0.0, Side::Left).values(), &[0.3]);
    }

    #[test]
    fn single_shock_travels_at_rankine_hugoniot_speed() {
        let m = lwr();
        let sol = solve_cauchy(&m, &full_line(&[0.0], &[0.1, 0.4]), 2.0, 1e-3).unwrap();
        assert_eq!(sol.fronts.len(), 1);
        let snap = sol.snapshot(2.0);
        assert_eq!(snap.values(), &[0.1, 0.4]);
        assert!((snap.breaks()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn centered_rarefaction_matches_self_similar_profile() {
        let m = lwr();
        let sol = solve_cauchy(&m, &full_line(&[0.0], &[0.7, 0.6]), 1.0, 0.01).unwrap();
        let u = sol.state_at(1.0, -0.3, Side::Left);
        assert!((u - 0.65).abs() <= 0.01 + 1e-12, "u={u}");
        // fan front strengths bounded by delta, Lax violated only within delta
        for f in &sol.fronts {
            assert!(f.left - f.right > 0.0 && f.left - f.right <= 0.01 + 1e-12);
            let s = m.shock_speed(f.left, f.right).unwrap();
            assert!((s - f.speed).abs() < 1e-12);
        }
    }

    #[test]
    fn shock_rarefaction_interaction_structure() {
        // shock from the left jump, rarefaction from the right jump, merging in x > 0
        let m = lwr();
        let u0 = full_line(&[-0.5, -0.1], &[0.1, 0.4, 0.3]);
        let sol = solve_cauchy(&m, &u0, 3.0, 1e-3).unwrap();
        let tr = sol.trace(0.0, Side::Left);
        assert_eq!(tr.last_value(), 0.1);
        // plateau a3, rising fan window, plateau a2, then a1 after the shock crosses
        assert!((tr.first_value() - 0.3).abs() < 1e-12);
        assert!((tr.value_at(0.7) - 0.4).abs() < 1e-12);
        assert!((tr.value_at(1.2) - 0.1).abs() < 1e-12);
        // the shock finishes eating the fan at t=3 exactly (mass balance), so
        // up to fan slivers of width O(delta) two regions remain: 0.1 | 0.3
        let snap = sol.snapshot(3.0);
        let wide: Vec<_> = snap
            .pieces_in(-2.0, 2.0)
            .into_iter()
            .filter(|(s, e, _)| e - s > 0.05)
            .collect();
        assert_eq!(wide.len(), 2);
        assert_eq!(wide[0].2, 0.1);
        assert_eq!(wide[1].2, 0.3);
        assert_eq!(snap.value_at(0.0), 0.1);
    }

    #[test]
    fn trace_breakpoints_of_shock_rarefaction_datum() {
        let m = lwr();
        let u0 = full_line(&[-0.5, -0.1], &[0.1, 0.4, 0.3]);
        let sol = solve_cauchy(&m, &u0, 3.0, 1e-3).unwrap();
        let tr = sol.trace(0.0, Side::Left);
        // fan arrives at -x2/f'(a3) = 0.25, tail at -x2/f'(a2) = 0.5, shock at 1
        let first_break = tr.breaks()[0];
        let last_break = *tr.breaks().last().unwrap();
        assert!((first_break - 0.25).abs() < 2e-3, "first={first_break}");
        assert!((last_break - 1.0).abs() < 2e-3, "last={last_break}");
    }

    #[test]
    fn incoming_ibvp_relaxed_constant() {
        let m = lwr();
        let u0 = StepFunction::constant(f64::NEG_INFINITY, 0.0, 0.3);
        let k = StepFunction::constant(0.0, 1.0, 0.7);
        let sol = solve_ibvp_incoming(&m, &u0, &k, 1.0, 1e-3).unwrap();
        assert!(sol.fronts.is_empty());
        assert_eq!(sol.trace(0.0, Side::Left).values(), &[0.3]);
    }

    #[test]
    fn incoming_ibvp_attained_entering_shock() {
        let m = lwr();
        let u0 = StepFunction::constant(f64::NEG_INFINITY, 0.0, 0.4);
        let k = StepFunction::constant(0.0, 1.0, 0.9);
        let sol = solve_ibvp_incoming(&m, &u0, &k, 1.0, 1e-3).unwrap();
        assert!((sol.state_at(1.0, -0.15, Side::Left) - 0.9).abs() < 1e-12);
        assert!((sol.state_at(1.0, -0.4, Side::Left) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn incoming_ibvp_critical_datum_leaves_trace() {
        let m = lwr();
        let u0 = StepFunction::constant(f64::NEG_INFINITY, 0.0, 0.3);
        let k = StepFunction::constant(0.0, 1.0, 0.5);
        let sol = solve_ibvp_incoming(&m, &u0, &k, 1.0, 1e-3).unwrap();
        assert_eq!(sol.trace(0.0, Side::Left).values(), &[0.3]);
    }

    #[test]
    fn outgoing_ibvp_examples() {
        let m = lwr();
        let u0 = StepFunction::constant(0.0, f64::INFINITY, 0.7);
        let k = StepFunction::constant(0.0, 1.0, 0.3);
        let sol = solve_ibvp_outgoing(&m, &u0, &k, 1.0, 1e-3).unwrap();
        assert_eq!(sol.trace(0.0, Side::Right).values(), &[0.7]);

        let u0 = StepFunction::constant(0.0, f64::INFINITY, 0.6);
        let k = StepFunction::constant(0.0, 1.0, 0.2);
        let sol = solve_ibvp_outgoing(&m, &u0, &k, 1.0, 1e-3).unwrap();
        let tr = sol.trace(0.0, Side::Right);
        assert_eq!(tr.first_value(), 0.2);
        // entering shock at speed 0.2
        assert!((sol.state_at(1.0, 0.1, Side::Left) - 0.2).abs() < 1e-12);
        assert!((sol.state_at(1.0, 0.3, Side::Left) - 0.6).abs() < 1e-12);

        let u0 = StepFunction::constant(0.0, f64::INFINITY, 0.3);
        let k = StepFunction::constant(0.0, 1.0, 0.3);
        let sol = solve_ibvp_outgoing(&m, &u0, &k, 1.0, 1e-3).unwrap();
        assert!(sol.fronts.is_empty());
    }

    #[test]
    fn boundary_jump_emits_and_absorption_logged() {
        let m = lwr();
        let u0 = StepFunction::constant(f64::NEG_INFINITY, 0.0, 0.2);
        // demand a drop of inflow halfway
        let k = StepFunction::new(0.0, 2.0, vec![1.0], vec![0.8, 0.9]).unwrap();
        let sol = solve_ibvp_incoming(&m, &u0, &k, 2.0, 1e-3).unwrap();
        assert!(sol.events.iter().any(|e| e.kind == EventKind::BoundaryJump));
        // shock (0.2|0.9) has speed (0.09-0.16)/0.7 = -0.1 < 0: enters at t=1
        assert!((sol.state_at(2.0, -0.05, Side::Left) - 0.9).abs() < 1e-12);
        assert!((sol.state_at(2.0, -0.2, Side::Left) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn stationary_shock_trace_sides() {
        let m = lwr();
        let sol = solve_cauchy(&m, &full_line(&[0.0], &[0.3, 0.7]), 1.0, 1e-3).unwrap();
        assert_eq!(sol.trace(0.0, Side::Left).values(), &[0.3]);
        assert_eq!(sol.trace(0.0, Side::Right).values(), &[0.7]);
    }

    #[test]
    fn determinism_bit_identical_event_logs() {
        let m = lwr();
        let u0 = full_line(&[-1.0, -0.3, 0.4], &[0.15, 0.8, 0.35, 0.6]);
        let a = solve_cauchy(&m, &u0, 4.0, 1e-3).unwrap();
        let b = solve_cauchy(&m, &u0, 4.0, 1e-3).unwrap();
        assert_eq!(a.events.len(), b.events.len());
        for (ea, eb) in a.events.iter().zip(b.events.iter()) {
            assert!(ea.time == eb.time && ea.position == eb.position);
            assert_eq!(ea.absorbed, eb.absorbed);
            assert_eq!(ea.born, eb.born);
        }
        for (fa, fb) in a.fronts.iter().zip(b.fronts.iter()) {
            assert!(fa.speed == fb.speed && fa.x_birth == fb.x_birth);
        }
    }

    #[test]
    fn finite_speed_of_propagation() {
        let m = lwr();
        let u0 = full_line(&[-1.0, 0.0, 1.0], &[0.9, 0.05, 0.95, 0.1]);
        let sol = solve_cauchy(&m, &u0, 3.0, 1e-2).unwrap();
        let bound = m.max_wave_speed() + 1e-12;
        for f in &sol.fronts {
            assert!(f.speed.abs() <= bound, "front speed {} exceeds {}", f.speed, bound);
        }
    }

    #[test]
    fn lax_condition_on_shocks() {
        let m = lwr();
        let u0 = full_line(&[-1.0, -0.3, 0.4], &[0.15, 0.8, 0.35, 0.6]);
        let sol = solve_cauchy(&m, &u0, 4.0, 1e-3).unwrap();
        for f in &sol.fronts {
            match f.kind {
                FrontKind::Shock => assert!(f.left < f.right),
                FrontKind::FanFront => {
                    assert!(f.left > f.right && f.left - f.right <= sol.delta + 1e-12)
                }
            }
        }
    }
}
