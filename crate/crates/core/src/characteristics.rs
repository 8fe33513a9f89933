//! Generalized characteristics over front-tracking solutions, exact centered
//! rarefaction formulas, and divergence-balance checks.
//!
//! Characteristics here are diagnostics, not the integrator. Backward paths
//! are genuine (constant slope `f'(u)`) across constant regions; a backward
//! path meeting a fan front rides it to its center (backward characteristics
//! converge into the small non-entropic jumps that discretize a rarefaction),
//! while shocks repel backward paths except at interaction vertices, where
//! the continuation is chosen by wedge feasibility with a minimal/maximal
//! selection. Forward paths are genuine until they merge into a shock and
//! then adhere to it.

use crate::flux::FluxModel;
use crate::fronttrack::{Domain, FrontKind, FtSolution, Side};
use crate::junction::CoupledSolution;
use crate::step::StepFunction;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CharError {
    #[error("position {x} is not reached by the fan window")]
    OutsideFanWindow { x: f64 },
    #[error("no forward boundary characteristic exists at t={t}")]
    NoForwardCharacteristic { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremality {
    Minimal,
    Maximal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CharOrigin {
    /// Backward path reached `t = 0` at this position.
    InitialFoot(f64),
    /// Path reached the node `x = 0` at this time.
    BoundaryExit(f64),
    /// Forward path survived to the horizon at this position.
    HorizonEnd(f64),
}

/// Polygonal generalized characteristic.
#[derive(Debug, Clone)]
pub struct CharPath {
    /// Vertices in traversal order: time-decreasing for backward paths,
    /// time-increasing for forward paths.
    pub vertices: Vec<(f64, f64)>,
    pub origin: CharOrigin,
}

impl CharPath {
    pub fn initial_foot(&self) -> Option<f64> {
        match self.origin {
            CharOrigin::InitialFoot(x) => Some(x),
            _ => None,
        }
    }

    /// Slope of the first traversed segment.
    pub fn initial_slope(&self) -> f64 {
        let (t0, x0) = self.vertices[0];
        let (t1, x1) = self.vertices[1];
        (x1 - x0) / (t1 - t0)
    }

    pub fn min_position(&self) -> f64 {
        self.vertices.iter().map(|&(_, x)| x).fold(f64::INFINITY, f64::min)
    }

    /// Position along the path at time `t` (clamped to the traversed range).
    pub fn position_at(&self, t: f64) -> f64 {
        let mut verts = self.vertices.clone();
        verts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if t <= verts[0].0 {
            return verts[0].1;
        }
        for w in verts.windows(2) {
            if t <= w[1].0 {
                let (ta, xa) = w[0];
                let (tb, xb) = w[1];
                if tb - ta <= 0.0 {
                    return xb;
                }
                return xa + (xb - xa) * (t - ta) / (tb - ta);
            }
        }
        verts.last().unwrap().1
    }
}

fn teps(sol: &FtSolution) -> f64 {
    1e-12 * sol.horizon.max(1.0)
}

fn ptol(sol: &FtSolution) -> f64 {
    1e-10 * (sol.model().max_wave_speed() * sol.horizon).max(1.0)
}

/// Latest intersection, strictly before `t_cur`, of the line through
/// `(t_cur, x_cur)` with slope `slope` and any front segment.
fn latest_backward_hit(sol: &FtSolution, t_cur: f64, x_cur: f64, slope: f64) -> Option<(f64, f64, usize)> {
    let eps = teps(sol);
    let mut best: Option<(f64, f64, usize)> = None;
    for f in &sol.fronts {
        let ds = f.speed - slope;
        if ds.abs() < 1e-14 {
            continue;
        }
        let s = (x_cur - slope * t_cur - f.x_birth + f.speed * f.t_birth) / ds;
        let death = f.death_time(sol.horizon);
        if s >= t_cur - 10.0 * eps || s < f.t_birth - eps || s > death + eps || s < -eps {
            continue;
        }
        if best.map_or(true, |(bs, ..)| s > bs) {
            let x = x_cur + slope * (s - t_cur);
            best = Some((s, x, f.id));
        }
    }
    best
}

/// Earliest intersection, strictly after `t_cur`, of the forward line with
/// any front segment.
fn earliest_forward_hit(sol: &FtSolution, t_cur: f64, x_cur: f64, slope: f64) -> Option<(f64, f64, usize)> {
    let eps = teps(sol);
    let mut best: Option<(f64, f64, usize)> = None;
    for f in &sol.fronts {
        let ds = f.speed - slope;
        if ds.abs() < 1e-14 {
            continue;
        }
        let s = (x_cur - slope * t_cur - f.x_birth + f.speed * f.t_birth) / ds;
        let death = f.death_time(sol.horizon);
        if s <= t_cur + 10.0 * eps || s < f.t_birth - eps || s > death + eps || s > sol.horizon + eps {
            continue;
        }
        if best.map_or(true, |(bs, ..)| s < bs) {
            let x = x_cur + slope * (s - t_cur);
            best = Some((s, x, f.id));
        }
    }
    best
}

/// Fronts dying at the vertex, ordered left to right just below it
/// (descending speed).
fn dying_at(sol: &FtSolution, t_v: f64, x_v: f64) -> Vec<usize> {
    let eps = teps(sol);
    let px = ptol(sol);
    let mut d: Vec<usize> = sol
        .fronts
        .iter()
        .filter(|f| {
            f.end
                .map(|(te, xe)| (te - t_v).abs() <= eps && (xe - x_v).abs() <= px)
                .unwrap_or(false)
        })
        .map(|f| f.id)
        .collect();
    d.sort_by(|&a, &b| sol.fronts[b].speed.partial_cmp(&sol.fronts[a].speed).unwrap());
    d
}

/// Fronts born at the vertex, ordered left to right just above it
/// (ascending speed).
fn born_at(sol: &FtSolution, t_v: f64, x_v: f64) -> Vec<usize> {
    let eps = teps(sol);
    let px = ptol(sol);
    let mut b: Vec<usize> = sol
        .fronts
        .iter()
        .filter(|f| (f.t_birth - t_v).abs() <= eps && (f.x_birth - x_v).abs() <= px)
        .map(|f| f.id)
        .collect();
    b.sort_by(|&a, &b| sol.fronts[a].speed.partial_cmp(&sol.fronts[b].speed).unwrap());
    b
}

enum BackMode {
    Genuine(f64),
    OnFront(usize),
}

/// Backward generalized characteristic from `(t, x)` down to `t = 0` or to
/// the node for half-line domains.
pub fn backward_characteristic(sol: &FtSolution, t: f64, x: f64, ext: Extremality) -> CharPath {
    let m = sol.model();
    let eps = teps(sol);
    let px = ptol(sol);
    let mut verts = vec![(t, x)];
    let mut t_cur = t;
    let mut x_cur = x;

    let mut mode = {
        let mut start: Option<BackMode> = None;
        for f in &sol.fronts {
            if f.alive_at(t_cur, sol.horizon) && (f.position(t_cur) - x_cur).abs() <= px {
                start = Some(match f.kind {
                    FrontKind::Shock => BackMode::Genuine(match ext {
                        Extremality::Minimal => f.left,
                        Extremality::Maximal => f.right,
                    }),
                    FrontKind::FanFront => BackMode::OnFront(f.id),
                });
                break;
            }
        }
        start.unwrap_or_else(|| {
            let side = match ext {
                Extremality::Minimal => Side::Left,
                Extremality::Maximal => Side::Right,
            };
            BackMode::Genuine(sol.state_at(t_cur, x_cur, side))
        })
    };

    let budget = 10 * sol.fronts.len() + 100;
    for _ in 0..budget {
        match mode {
            BackMode::OnFront(id) => {
                let f = &sol.fronts[id];
                t_cur = f.t_birth;
                x_cur = f.x_birth;
                verts.push((t_cur, x_cur));
                if t_cur <= eps {
                    return CharPath { vertices: verts, origin: CharOrigin::InitialFoot(x_cur) };
                }
                if sol.domain.is_half_line() && x_cur.abs() <= px {
                    return CharPath { vertices: verts, origin: CharOrigin::BoundaryExit(t_cur) };
                }
                mode = continue_below_vertex(sol, t_cur, x_cur, ext);
            }
            BackMode::Genuine(u) => {
                let slope = m.fp(u);
                let hit = latest_backward_hit(sol, t_cur, x_cur, slope);
                // node exit for half-line domains
                let t_node = if sol.domain.is_half_line() && slope.abs() > 1e-14 {
                    let s = t_cur - x_cur / slope;
                    (s < t_cur - eps && s > eps).then_some(s)
                } else {
                    None
                };
                let front_first = match (hit, t_node) {
                    (Some((s, ..)), Some(tn)) => s > tn,
                    (Some(_), None) => true,
                    _ => false,
                };
                if front_first {
                    let (s, xs, id) = hit.unwrap();
                    t_cur = s;
                    x_cur = xs;
                    verts.push((t_cur, x_cur));
                    let f = &sol.fronts[id];
                    if (s - f.t_birth).abs() <= 10.0 * eps && (xs - f.x_birth).abs() <= px {
                        if t_cur <= eps {
                            return CharPath { vertices: verts, origin: CharOrigin::InitialFoot(x_cur) };
                        }
                        if sol.domain.is_half_line() && x_cur.abs() <= px {
                            return CharPath { vertices: verts, origin: CharOrigin::BoundaryExit(t_cur) };
                        }
                        mode = continue_below_vertex(sol, t_cur, x_cur, ext);
                    } else {
                        // mid-segment hit: ride the front backward
                        mode = BackMode::OnFront(id);
                    }
                } else if let Some(tn) = t_node {
                    verts.push((tn, 0.0));
                    return CharPath { vertices: verts, origin: CharOrigin::BoundaryExit(tn) };
                } else {
                    let foot = x_cur - slope * t_cur;
                    verts.push((0.0, foot));
                    return CharPath { vertices: verts, origin: CharOrigin::InitialFoot(foot) };
                }
            }
        }
    }
    let origin = CharOrigin::InitialFoot(x_cur - m.fp(sol.state_at(t_cur, x_cur, Side::Left)) * t_cur);
    CharPath { vertices: verts, origin }
}

/// Picks the continuation of a backward path through an interaction vertex:
/// a genuine characteristic in a feasible wedge below the vertex, or riding
/// the outermost dying front when no wedge is feasible.
fn continue_below_vertex(sol: &FtSolution, t_v: f64, x_v: f64, ext: Extremality) -> BackMode {
    let m = sol.model();
    let d = dying_at(sol, t_v, x_v);
    if d.is_empty() {
        let side = match ext {
            Extremality::Minimal => Side::Left,
            Extremality::Maximal => Side::Right,
        };
        let h = 100.0 * teps(sol);
        return BackMode::Genuine(sol.state_at((t_v - h).max(0.0), x_v, side));
    }
    let tol = 1e-9 * m.max_wave_speed().max(1.0);
    // wedge states left to right: D[0].left, D[0].right, ..., D[last].right
    let mut wedges: Vec<(f64, f64, f64)> = Vec::new(); // (state, lo_slope, hi_slope)
    let s0 = sol.fronts[d[0]].speed;
    wedges.push((sol.fronts[d[0]].left, s0, f64::INFINITY));
    for i in 0..d.len() {
        let hi = sol.fronts[d[i]].speed;
        let lo = if i + 1 < d.len() { sol.fronts[d[i + 1]].speed } else { f64::NEG_INFINITY };
        wedges.push((sol.fronts[d[i]].right, lo, hi));
    }
    let feasible = |w: &(f64, f64, f64)| {
        let lam = m.fp(w.0);
        lam >= w.1 - tol && lam <= w.2 + tol
    };
    let pick = match ext {
        Extremality::Minimal => wedges.iter().find(|w| feasible(w)),
        Extremality::Maximal => wedges.iter().rev().find(|w| feasible(w)),
    };
    match pick {
        Some(&(state, ..)) => BackMode::Genuine(state),
        None => BackMode::OnFront(match ext {
            Extremality::Minimal => d[0],
            Extremality::Maximal => *d.last().unwrap(),
        }),
    }
}

/// Follows a front forward through its interaction vertices, keeping to the
/// rightmost continuation. Returns the polyline and how it ended.
pub fn ride_front_chain(sol: &FtSolution, start: usize) -> CharPath {
    let m = sol.model();
    let px = ptol(sol);
    let mut id = start;
    let mut verts = vec![(sol.fronts[id].t_birth, sol.fronts[id].x_birth)];
    let budget = 10 * sol.fronts.len() + 100;
    for _ in 0..budget {
        let f = &sol.fronts[id];
        match f.end {
            None => {
                verts.push((sol.horizon, f.position(sol.horizon)));
                return CharPath { vertices: verts, origin: CharOrigin::HorizonEnd(f.position(sol.horizon)) };
            }
            Some((td, xd)) => {
                verts.push((td, xd));
                if sol.domain.is_half_line() && xd.abs() <= px && td > f.t_birth {
                    return CharPath { vertices: verts, origin: CharOrigin::BoundaryExit(td) };
                }
                let born = born_at(sol, td, xd);
                match born.last() {
                    Some(&next) => id = next,
                    None => {
                        // complete cancellation: continue as a genuine line
                        let state = sol.fronts[f.id].right;
                        return extend_genuine_forward(sol, verts, td, xd, m.fp(state));
                    }
                }
            }
        }
    }
    let last = *verts.last().unwrap();
    CharPath { vertices: verts, origin: CharOrigin::HorizonEnd(last.1) }
}

fn extend_genuine_forward(sol: &FtSolution, mut verts: Vec<(f64, f64)>, t0: f64, x0: f64, slope0: f64) -> CharPath {
    let m = sol.model();
    let eps = teps(sol);
    let _px = ptol(sol);
    let mut t_cur = t0;
    let mut x_cur = x0;
    let mut slope = slope0;
    let budget = 10 * sol.fronts.len() + 100;
    for _ in 0..budget {
        let hit = earliest_forward_hit(sol, t_cur, x_cur, slope);
        let t_node = if sol.domain.is_half_line() && slope.abs() > 1e-14 {
            let s = t_cur - x_cur / slope;
            (s > t_cur + eps && s < sol.horizon).then_some(s)
        } else {
            None
        };
        let front_first = match (hit, t_node) {
            (Some((s, ..)), Some(tn)) => s < tn,
            (Some(_), None) => true,
            _ => false,
        };
        if front_first {
            let (s, xs, id) = hit.unwrap();
            t_cur = s;
            x_cur = xs;
            verts.push((t_cur, x_cur));
            match sol.fronts[id].kind {
                FrontKind::Shock => {
                    // adhere: continue along the shock chain
                    let mut tail = ride_front_chain_from(sol, id, t_cur);
                    verts.append(&mut tail.vertices);
                    return CharPath { vertices: verts, origin: tail.origin };
                }
                FrontKind::FanFront => {
                    // grazing a fan front: cross it
                    let f = &sol.fronts[id];
                    let state = if slope > f.speed { f.right } else { f.left };
                    slope = m.fp(state);
                }
            }
        } else if let Some(tn) = t_node {
            verts.push((tn, 0.0));
            return CharPath { vertices: verts, origin: CharOrigin::BoundaryExit(tn) };
        } else {
            let xe = x_cur + slope * (sol.horizon - t_cur);
            verts.push((sol.horizon, xe));
            return CharPath { vertices: verts, origin: CharOrigin::HorizonEnd(xe) };
        }
    }
    let last = *verts.last().unwrap();
    CharPath { vertices: verts, origin: CharOrigin::HorizonEnd(last.1) }
}

fn ride_front_chain_from(sol: &FtSolution, id: usize, t_from: f64) -> CharPath {
    let mut path = ride_front_chain(sol, id);
    path.vertices.retain(|&(t, _)| t >= t_from - teps(sol));
    path
}

/// Maximal forward generalized characteristic from the node of an outgoing
/// solution, per the boundary-characteristic existence condition: it exists
/// when the trace is below the critical state, or when the datum jumps below
/// a critical trace, or when the trace lies between the critical state and
/// the companion of the datum.
pub fn forward_boundary_characteristic(sol: &FtSolution, t: f64) -> Result<CharPath, CharError> {
    assert_eq!(sol.domain, Domain::OutgoingHalfLine, "node characteristics start on the outgoing road");
    let m = sol.model();
    let theta = m.theta();
    let trace = sol.trace(0.0, Side::Right);
    let u = trace.value_at(t);
    let k_fun = sol.boundary.as_ref().expect("outgoing solve keeps its datum");
    let k = k_fun.value_at(t);
    let k_prev = k_fun.limit_left(t);
    let tol = 1e-9;

    let slope = if u < theta - tol {
        m.fp(u)
    } else if (k < theta - tol && u > theta + tol && u <= m.companion(k).unwrap_or(f64::NEG_INFINITY) + tol)
        || (k < k_prev - tol && (u - k_prev).abs() <= tol && u <= theta + tol)
    {
        (m.f(u) - m.f(k)) / (u - k)
    } else {
        return Err(CharError::NoForwardCharacteristic { t });
    };

    // ride a node-born front when the engine materialized one here
    let eps_birth = 10.0 * sol.delta * sol.horizon.max(1.0);
    let node_front = sol
        .fronts
        .iter()
        .filter(|f| f.x_birth.abs() <= ptol(sol) && f.t_birth >= t - teps(sol) && f.t_birth <= t + eps_birth)
        .min_by(|a, b| a.t_birth.partial_cmp(&b.t_birth).unwrap());
    if let Some(f) = node_front {
        if (f.speed - slope).abs() <= 0.5 * m.max_wave_speed() {
            let mut path = ride_front_chain(sol, f.id);
            if f.t_birth > t {
                path.vertices.insert(0, (t, 0.0));
            }
            return Ok(path);
        }
    }
    Ok(extend_genuine_forward(sol, vec![(t, 0.0)], t, 0.0, slope))
}

/// Window of times at which the centered rarefaction `(ul, ur)` from
/// `center` covers position `x`.
pub fn rarefaction_window(model: &FluxModel, center: f64, ul: f64, ur: f64, x: f64) -> Result<(f64, f64), CharError> {
    assert!(ul > ur, "a rarefaction needs a downward jump");
    let w = x - center;
    let (sl, sh) = (model.fp(ul), model.fp(ur));
    let (ta, tb) = (w / sl, w / sh);
    if !(ta.is_finite() && tb.is_finite()) || ta <= 0.0 && tb <= 0.0 {
        return Err(CharError::OutsideFanWindow { x });
    }
    Ok((ta.min(tb).max(0.0), ta.max(tb)))
}

/// Value of the fan trace `t -> (f')^{-1}((x - center)/t)` at time `t`.
pub fn rarefaction_value(model: &FluxModel, center: f64, ul: f64, ur: f64, x: f64, t: f64) -> Result<f64, CharError> {
    let (lo, hi) = rarefaction_window(model, center, ul, ur, x)?;
    let slack = 1e-9 * hi.max(1.0);
    if t < lo - slack || t > hi + slack {
        return Err(CharError::OutsideFanWindow { x });
    }
    Ok(model.deriv_inverse((x - center) / t))
}

/// Exact integral of the flux of the fan trace over `(ta, tb)`: closed form
/// for the quadratic families, adaptive quadrature otherwise.
pub fn rarefaction_flux_integral(
    model: &FluxModel,
    center: f64,
    x: f64,
    ta: f64,
    tb: f64,
) -> f64 {
    let w = x - center;
    if let Some(anti) = quadratic_antiderivative(model, w) {
        return anti(tb) - anti(ta);
    }
    adaptive_simpson(
        &|t: f64| model.f(model.deriv_inverse(w / t)),
        ta,
        tb,
        1e-12,
        40,
    )
}

/// Antiderivative of `t -> f((f')^{-1}(w/t))` when a closed form exists.
fn quadratic_antiderivative(model: &FluxModel, w: f64) -> Option<Box<dyn Fn(f64) -> f64>> {
    // Probe the model family through exact relations: quadratic models have
    // constant second derivative.
    let (lo, hi) = model.range();
    let um = 0.5 * (lo + hi);
    let h = (hi - lo) / 8.0;
    let d2a = (model.fp(um + h) - model.fp(um - h)) / (2.0 * h);
    let d2b = (model.fp(um + 2.0 * h) - model.fp(um - 2.0 * h)) / (4.0 * h);
    if (d2a - d2b).abs() > 1e-9 * d2a.abs().max(1.0) {
        return None;
    }
    // f(u) = -c2/2 (u - theta)^2 + f(theta) with c2 = -f''
    let c2 = -d2a;
    let fmax = model.max_flux();
    let w2 = w * w;
    // u(t) = theta - w/(c2 t)  =>  f(u(t)) = fmax - w^2/(2 c2 t^2)
    Some(Box::new(move |t: f64| fmax * t + w2 / (2.0 * c2 * t)))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: usize) -> f64 {
        let m = 0.5 * (a + b);
        let l = simpson(f, a, m);
        let r = simpson(f, m, b);
        if depth == 0 || (l + r - whole).abs() <= 15.0 * tol {
            l + r + (l + r - whole) / 15.0
        } else {
            rec(f, a, m, l, tol / 2.0, depth - 1) + rec(f, m, b, r, tol / 2.0, depth - 1)
        }
    }
    rec(f, a, b, simpson(f, a, b), tol, depth)
}

/// Conservation defect over the rectangle `[t1, t2] x [a, b]`:
/// change of mass plus net outflux through the sides. Exact integrals of the
/// piecewise-constant solution make this vanish to rounding.
pub fn divergence_residual(sol: &FtSolution, t1: f64, t2: f64, a: f64, b: f64) -> f64 {
    let m2 = sol.snapshot(t2).integral(a, b);
    let m1 = sol.snapshot(t1).integral(a, b);
    let influx = sol.flux_trace(a, Side::Right).integral(t1, t2);
    let outflux = sol.flux_trace(b, Side::Left).integral(t1, t2);
    (m2 - m1) + (outflux - influx)
}

/// Divergence balance across the node for a coupled pair, `a < 0 < b`; the
/// matched junction fluxes cancel, so any residual reflects either rounding
/// or a genuine flux mismatch.
pub fn divergence_residual_coupled(c: &CoupledSolution, t1: f64, t2: f64, a: f64, b: f64) -> f64 {
    let mass = |t: f64| {
        c.incoming.snapshot(t).integral(a, 0.0) + c.outgoing.snapshot(t).integral(0.0, b)
    };
    let influx = c.incoming.flux_trace(a, Side::Right).integral(t1, t2);
    let outflux = c.outgoing.flux_trace(b, Side::Left).integral(t1, t2);
    (mass(t2) - mass(t1)) + (outflux - influx)
}

/// Residual scale for divergence checks: rectangle perimeter times the
/// largest flux/state magnitude.
pub fn residual_scale(model: &FluxModel, t1: f64, t2: f64, a: f64, b: f64) -> f64 {
    let (lo, hi) = model.range();
    let umax = lo.abs().max(hi.abs()).max(model.max_flux().abs()).max(1.0);
    2.0 * ((t2 - t1) + (b - a)) * umax
}

/// Value integral of a step-function trace composed with the flux; helper for
/// cumulative-flux comparisons.
pub fn cumulative_flux(model: &FluxModel, trace: &StepFunction, upto: f64) -> f64 {
    trace.map(|u| model.f(u)).integral(trace.lo(), upto)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fronttrack::{solve_cauchy, solve_ibvp_outgoing};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lwr() -> FluxModel {
        FluxModel::lwr()
    }

    fn full_line(breaks: &[f64], values: &[f64]) -> StepFunction {
        StepFunction::new(f64::NEG_INFINITY, f64::INFINITY, breaks.to_vec(), values.to_vec()).unwrap()
    }

    #[test]
    fn backward_through_constant_solution_is_straight() {
        let m = lwr();
        let sol = solve_cauchy(&m, &full_line(&[], &[0.3]), 2.0, 1e-3).unwrap();
        let p = backward_characteristic(&sol, 1.0, 0.0, Extremality::Minimal);
        assert!((p.initial_foot().unwrap() + 0.4).abs() < 1e-12);
        assert_eq!(p.vertices.len(), 2);
    }

    #[test]
    fn backward_through_fan_reaches_center() {
        let m = lwr();
        let sol = solve_cauchy(&m, &full_line(&[0.0], &[0.7, 0.6]), 1.0, 0.01).unwrap();
        let p = backward_characteristic(&sol, 1.0, -0.3, Extremality::Minimal);
        let foot = p.initial_foot().unwrap();
        assert!(foot.abs() < 1e-9, "foot={foot}");
    }

    #[test]
    fn backward_from_merged_state_lands_left_of_first_jump() {
        let m = lwr();
        let u0 = full_line(&[-0.5, -0.1], &[0.1, 0.4, 0.3]);
        let sol = solve_cauchy(&m, &u0, 3.0, 1e-3).unwrap();
        let p = backward_characteristic(&sol, 3.0, 0.0, Extremality::Minimal);
        let foot = p.initial_foot().unwrap();
        assert!((foot + 2.4).abs() < 1e-9, "foot={foot}");
        assert!(foot < -0.5);
    }

    #[test]
    fn backward_paths_do_not_cross() {
        let m = lwr();
        let u0 = full_line(&[-0.5, -0.1], &[0.1, 0.4, 0.3]);
        let sol = solve_cauchy(&m, &u0, 3.0, 1e-2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut paths = Vec::new();
        for _ in 0..60 {
            let t: f64 = rng.gen_range(0.5..3.0);
            let x: f64 = rng.gen_range(-1.5..1.5);
            paths.push((t, backward_characteristic(&sol, t, x, Extremality::Minimal)));
        }
        for i in 0..paths.len() {
            for j in i + 1..paths.len() {
                let t_common = paths[i].0.min(paths[j].0);
                let mut prev: Option<f64> = None;
                for step in 0..20 {
                    let s = t_common * (step as f64 + 0.5) / 20.0;
                    let d = paths[i].1.position_at(s) - paths[j].1.position_at(s);
                    if let Some(p) = prev {
                        // sign changes only through (near-)contact
                        if p.signum() != d.signum() {
                            assert!(p.abs() < 2e-2 || d.abs() < 2e-2, "paths crossed: {p} vs {d}");
                        }
                    }
                    prev = Some(d);
                }
            }
        }
    }

    #[test]
    fn forward_boundary_slopes() {
        let m = lwr();
        // free-flow trace: genuine slope f'(u)
        let u0 = StepFunction::constant(0.0, f64::INFINITY, 0.3);
        let k = StepFunction::constant(0.0, 1.0, 0.3);
        let sol = solve_ibvp_outgoing(&m, &u0, &k, 1.0, 1e-3).unwrap();
        let p = forward_boundary_characteristic(&sol, 0.2).unwrap();
        assert!((p.initial_slope() - 0.4).abs() < 1e-9);

        // companion trace: tangential start
        let u0 = StepFunction::constant(0.0, f64::INFINITY, 0.7);
        let k = StepFunction::constant(0.0, 1.0, 0.3);
        let sol = solve_ibvp_outgoing(&m, &u0, &k, 1.0, 1e-3).unwrap();
        let p = forward_boundary_characteristic(&sol, 0.2).unwrap();
        assert!(p.initial_slope().abs() < 1e-9);

        // congested trace above the companion: no forward characteristic
        let u0 = StepFunction::constant(0.0, f64::INFINITY, 0.9);
        let k = StepFunction::constant(0.0, 1.0, 0.3);
        let sol = solve_ibvp_outgoing(&m, &u0, &k, 1.0, 1e-3).unwrap();
        assert!(forward_boundary_characteristic(&sol, 0.2).is_err());
    }

    #[test]
    fn rarefaction_closed_forms() {
        let m = lwr();
        let v = rarefaction_value(&m, 0.5, 0.7, 0.6, 0.0, 2.0).unwrap();
        assert!((v - 0.625).abs() < 1e-12);
        let (lo, hi) = rarefaction_window(&m, 0.5, 0.7, 0.6, 0.0).unwrap();
        assert!((lo - 1.25).abs() < 1e-12 && (hi - 2.5).abs() < 1e-12);
        let q = rarefaction_flux_integral(&m, 0.5, 0.0, 1.25, 2.5);
        assert!((q - 0.2875).abs() < 1e-12, "q={q}");
    }

    #[test]
    fn rarefaction_quadrature_matches_closed_form() {
        let grid: Vec<f64> = (0..=80).map(|i| i as f64 / 80.0).collect();
        let vals: Vec<f64> = grid.iter().map(|u| u * (1.0 - u)).collect();
        let tab = FluxModel::tabulated(grid, vals).unwrap();
        let q_tab = rarefaction_flux_integral(&tab, 0.5, 0.0, 1.3, 2.4);
        let q_exact = rarefaction_flux_integral(&lwr(), 0.5, 0.0, 1.3, 2.4);
        assert!((q_tab - q_exact).abs() < 1e-4, "tab={q_tab} exact={q_exact}");
    }

    #[test]
    fn divergence_residual_vanishes() {
        let m = lwr();
        let sol = solve_cauchy(&m, &full_line(&[], &[0.4]), 2.0, 1e-3).unwrap();
        assert!(divergence_residual(&sol, 0.2, 1.7, -1.0, 1.0).abs() < 1e-14);

        let u0 = full_line(&[-0.5, -0.1], &[0.1, 0.4, 0.3]);
        let sol = solve_cauchy(&m, &u0, 3.0, 1e-3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..50 {
            let ta: f64 = rng.gen_range(0.0..2.5);
            let tb: f64 = rng.gen_range(ta + 0.1..3.0);
            let a: f64 = rng.gen_range(-2.0..0.5);
            let b: f64 = rng.gen_range(a + 0.2..2.5);
            let r = divergence_residual(&sol, ta, tb, a, b);
            let scale = residual_scale(&m, ta, tb, a, b);
            assert!(r.abs() <= 1e-8 * scale, "residual {r} on [{ta},{tb}]x[{a},{b}]");
        }
    }
}
