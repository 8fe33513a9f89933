//! Event-driven wavefront tracking.
//!
//! Solutions are piecewise constant in `x` for every `t`; the moving
//! discontinuities ("fronts") are straight segments in the `(t, x)` plane,
//! each carrying fixed left/right states and an exact Rankine-Hugoniot speed.
//! Interactions kill the incoming fronts and create new ones, so every front
//! is a single segment and the solution is fully described by the front list
//! plus the event log. Rarefactions are split into fan fronts of strength at
//! most `delta`; each fan front travels at the Rankine-Hugoniot speed of its
//! small jump, which keeps conservation exact.

mod engine;

pub use engine::{solve, solve_cauchy, solve_ibvp_incoming, solve_ibvp_outgoing, EngineError, ProblemSpec};

use crate::flux::FluxModel;
use crate::step::StepFunction;

/// Computational domain of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    FullLine,
    /// Incoming road `x < 0`, boundary on the right.
    IncomingHalfLine,
    /// Outgoing road `x > 0`, boundary on the left.
    OutgoingHalfLine,
}

impl Domain {
    pub fn x_lo(&self) -> f64 {
        match self {
            Domain::OutgoingHalfLine => 0.0,
            _ => f64::NEG_INFINITY,
        }
    }

    pub fn x_hi(&self) -> f64 {
        match self {
            Domain::IncomingHalfLine => 0.0,
            _ => f64::INFINITY,
        }
    }

    pub fn is_half_line(&self) -> bool {
        !matches!(self, Domain::FullLine)
    }
}

/// One-sided limit selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrontKind {
    Shock,
    /// Small non-entropic jump approximating a slice of a rarefaction.
    FanFront,
}

/// A single constant-speed discontinuity segment.
#[derive(Debug, Clone)]
pub struct Front {
    pub id: usize,
    pub kind: FrontKind,
    pub left: f64,
    pub right: f64,
    pub speed: f64,
    pub t_birth: f64,
    pub x_birth: f64,
    /// `(time, position)` where the front died; `None` while alive at the horizon.
    pub end: Option<(f64, f64)>,
}

impl Front {
    pub fn position(&self, t: f64) -> f64 {
        self.x_birth + self.speed * (t - self.t_birth)
    }

    pub fn death_time(&self, horizon: f64) -> f64 {
        self.end.map(|(t, _)| t).unwrap_or(horizon)
    }

    pub fn alive_at(&self, t: f64, horizon: f64) -> bool {
        t >= self.t_birth && t <= self.death_time(horizon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Collision,
    BoundaryJump,
    BoundaryEmission,
    FrontAbsorbedAtBoundary,
}

#[derive(Debug, Clone)]
pub struct Event {
    pub time: f64,
    pub kind: EventKind,
    pub position: f64,
    pub absorbed: Vec<usize>,
    pub born: Vec<usize>,
}

/// Immutable front-tracking solution timeline.
#[derive(Debug, Clone)]
pub struct FtSolution {
    pub(crate) model: FluxModel,
    pub domain: Domain,
    pub horizon: f64,
    pub delta: f64,
    pub fronts: Vec<Front>,
    pub events: Vec<Event>,
    pub initial: StepFunction,
    pub boundary: Option<StepFunction>,
    /// `(time, value)` entries recorded whenever the domain became uniform.
    pub(crate) uniform_after: Vec<(f64, f64)>,
}

impl FtSolution {
    pub fn model(&self) -> &FluxModel {
        &self.model
    }

    fn uniform_value_at(&self, t: f64) -> f64 {
        let mut v = self.initial.first_value();
        for &(tu, vu) in &self.uniform_after {
            if tu <= t {
                v = vu;
            } else {
                break;
            }
        }
        v
    }

    fn time_tol(&self) -> f64 {
        1e-12 * self.horizon.max(1.0)
    }

    fn pos_tol(&self) -> f64 {
        1e-10 * (self.model.max_wave_speed() * self.horizon).max(1.0)
    }

    /// Exact one-sided evaluation `u(t, x^-)` / `u(t, x^+)`.
    ///
    /// A front sitting at `x` (within positional roundoff) belongs to the left
    /// side: its left state is reported for `Side::Left`, and `Side::Right`
    /// looks strictly beyond it.
    pub fn state_at(&self, t: f64, x: f64, side: Side) -> f64 {
        let ptol = self.pos_tol();
        // governing front: the leftmost one at or beyond x (per side rule)
        let mut governing: Option<(f64, f64, usize)> = None; // (pos, speed, id)
        let mut below: Option<(f64, f64, usize)> = None;
        let mut any = false;
        for f in &self.fronts {
            if !f.alive_at(t, self.horizon) {
                continue;
            }
            any = true;
            let p = f.position(t);
            let beyond = match side {
                Side::Left => p >= x - ptol,
                Side::Right => p > x + ptol,
            };
            if beyond {
                let better = match governing {
                    None => true,
                    Some((bp, bs, _)) => p < bp || (p == bp && f.speed > bs),
                };
                if better {
                    governing = Some((p, f.speed, f.id));
                }
            } else {
                let better = match below {
                    None => true,
                    Some((bp, bs, _)) => p > bp || (p == bp && f.speed > bs),
                };
                if better {
                    below = Some((p, f.speed, f.id));
                }
            }
        }
        if let Some((_, _, id)) = governing {
            self.fronts[id].left
        } else if let Some((_, _, id)) = below {
            self.fronts[id].right
        } else if any {
            unreachable!("front list non-empty but no governing front")
        } else {
            self.uniform_value_at(t)
        }
    }

    /// Profile `u(t, ·)` as a canonical step function on the domain interval.
    pub fn snapshot(&self, t: f64) -> StepFunction {
        let mut alive: Vec<&Front> = self
            .fronts
            .iter()
            .filter(|f| f.alive_at(t, self.horizon))
            .collect();
        if alive.is_empty() {
            return StepFunction::constant(self.domain.x_lo(), self.domain.x_hi(), self.uniform_value_at(t));
        }
        alive.sort_by(|a, b| {
            let pa = a.position(t);
            let pb = b.position(t);
            pa.partial_cmp(&pb)
                .unwrap()
                .then(b.speed.partial_cmp(&a.speed).unwrap())
        });
        let mut breaks = Vec::with_capacity(alive.len());
        let mut values = Vec::with_capacity(alive.len() + 1);
        values.push(alive[0].left);
        for f in &alive {
            breaks.push(f.position(t));
            values.push(f.right);
        }
        StepFunction::from_unnormalized(self.domain.x_lo(), self.domain.x_hi(), &breaks, &values)
    }

    /// One-sided trace `t -> u(t, x^±)` on `(0, horizon)` as a canonical
    /// right-continuous step function.
    pub fn trace(&self, x: f64, side: Side) -> StepFunction {
        let tol = self.time_tol();
        let mut cuts: Vec<f64> = vec![0.0, self.horizon];
        for f in &self.fronts {
            let death = f.death_time(self.horizon);
            if f.speed != 0.0 {
                let tx = f.t_birth + (x - f.x_birth) / f.speed;
                if tx >= f.t_birth - tol && tx <= death + tol && tx > tol && tx < self.horizon - tol {
                    cuts.push(tx);
                }
            } else if (f.x_birth - x).abs() <= self.pos_tol() {
                for c in [f.t_birth, death] {
                    if c > tol && c < self.horizon - tol {
                        cuts.push(c);
                    }
                }
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() <= tol);
        let mut breaks = Vec::with_capacity(cuts.len());
        let mut values = Vec::with_capacity(cuts.len() + 1);
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            values.push(self.state_at(mid, x, side));
        }
        if values.is_empty() {
            values.push(self.state_at(0.5 * self.horizon, x, side));
        }
        for &c in cuts.iter().skip(1).take(values.len() - 1) {
            breaks.push(c);
        }
        StepFunction::from_unnormalized(0.0, self.horizon, &breaks, &values)
    }

    /// Flux of the one-sided trace, `t -> f(u(t, x^±))`.
    pub fn flux_trace(&self, x: f64, side: Side) -> StepFunction {
        self.trace(x, side).map(|u| self.model.f(u))
    }

    /// One-sided limit of the terminal profile at the node.
    pub fn terminal_node_state(&self, side: Side) -> f64 {
        let snap = self.snapshot(self.horizon);
        match side {
            Side::Left => snap.limit_left(0.0),
            Side::Right => snap.value_at(0.0),
        }
    }

    /// Fronts born at the node (position 0) after the initial instant,
    /// together with their birth times. Used for junction-structure reports.
    pub fn node_born_fronts(&self) -> Vec<usize> {
        let tol = self.time_tol() * self.model.max_wave_speed().max(1.0);
        self.fronts
            .iter()
            .filter(|f| f.x_birth.abs() <= tol.max(1e-12))
            .map(|f| f.id)
            .collect()
    }
}
