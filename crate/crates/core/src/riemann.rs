//! Exact Riemann solutions for a concave flux, and the relaxed Dirichlet
//! boundary resolution for the two half-line problems.
//!
//! For a strictly concave flux the admissible (Lax) shocks are the upward
//! jumps `ul < ur`; downward jumps open into centered rarefactions. The
//! boundary condition is realized through the boundary Riemann problem: the
//! self-similar fan between datum and interior trace is restricted to the
//! domain side, and a zero-speed wave sitting exactly at the boundary belongs
//! to the exterior (the domain-side trace is the state adjacent to the
//! domain).

use crate::flux::{FluxError, FluxModel};
use thiserror::Error;

/// Relative cutoff deciding when an emitted wave speed counts as zero.
const ZERO_SPEED_REL: f64 = 1e-13;

#[derive(Debug, Error)]
pub enum RiemannError {
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error("boundary datum {k} below the critical state {theta} on the incoming road")]
    BoundaryDatumBelowTheta { k: f64, theta: f64 },
    #[error("boundary datum {k} above the critical state {theta} on the outgoing road")]
    BoundaryDatumAboveTheta { k: f64, theta: f64 },
}

/// Self-similar solution of a single Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WaveFan {
    Constant { u: f64 },
    Shock { ul: f64, ur: f64, speed: f64 },
    Rarefaction { ul: f64, ur: f64, speed_lo: f64, speed_hi: f64 },
}

impl WaveFan {
    pub fn slowest(&self) -> f64 {
        match *self {
            WaveFan::Constant { .. } => f64::INFINITY,
            WaveFan::Shock { speed, .. } => speed,
            WaveFan::Rarefaction { speed_lo, .. } => speed_lo,
        }
    }

    pub fn fastest(&self) -> f64 {
        match *self {
            WaveFan::Constant { .. } => f64::NEG_INFINITY,
            WaveFan::Shock { speed, .. } => speed,
            WaveFan::Rarefaction { speed_hi, .. } => speed_hi,
        }
    }
}

/// Exact solution of the Riemann problem with left state `ul`, right state
/// `ur`. Jumps below the degeneracy threshold collapse to a constant.
pub fn solve(model: &FluxModel, ul: f64, ur: f64) -> Result<WaveFan, RiemannError> {
    model.eval(ul)?;
    model.eval(ur)?;
    if (ul - ur).abs() < 1e-14 {
        return Ok(WaveFan::Constant { u: ul });
    }
    if ul < ur {
        let speed = model.shock_speed(ul, ur)?;
        Ok(WaveFan::Shock { ul, ur, speed })
    } else {
        Ok(WaveFan::Rarefaction {
            ul,
            ur,
            speed_lo: model.fp(ul),
            speed_hi: model.fp(ur),
        })
    }
}

/// Value of the self-similar solution along the ray `x/t = slope`. At the
/// exact speed of a shock the right state wins (right continuity in `x`).
pub fn sample(model: &FluxModel, fan: &WaveFan, slope: f64) -> f64 {
    match *fan {
        WaveFan::Constant { u } => u,
        WaveFan::Shock { ul, ur, speed } => {
            if slope < speed {
                ul
            } else {
                ur
            }
        }
        WaveFan::Rarefaction { ul, ur, speed_lo, speed_hi } => {
            if slope <= speed_lo {
                ul
            } else if slope >= speed_hi {
                ur
            } else {
                model.deriv_inverse(slope)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// The realized trace equals the boundary datum.
    Attained,
    /// The datum is relaxed: the trace keeps characteristics leaving the
    /// domain and carries no more flux than the datum.
    Relaxed,
}

/// Outcome of a boundary Riemann problem restricted to the domain side.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryResolution {
    pub trace: f64,
    pub mode: BoundaryMode,
    /// Wave entering the domain, if any. For the incoming road every wave of
    /// the fan has strictly negative speed, for the outgoing road strictly
    /// positive speed.
    pub emitted: Option<WaveFan>,
}

fn zero_speed_tol(model: &FluxModel) -> f64 {
    ZERO_SPEED_REL * model.max_wave_speed().max(1.0)
}

/// Boundary resolution for the incoming road (domain `x < 0`, boundary on the
/// right). Solves the Riemann problem `(interior, k)` and keeps the waves
/// with negative speed.
pub fn resolve_boundary_incoming(
    model: &FluxModel,
    k: f64,
    interior: f64,
) -> Result<BoundaryResolution, RiemannError> {
    let theta = model.theta();
    if k < theta - crate::flux::ROOT_TOL {
        return Err(RiemannError::BoundaryDatumBelowTheta { k, theta });
    }
    let k = k.max(theta);
    let fan = solve(model, interior, k)?;
    let tol = zero_speed_tol(model);
    Ok(match fan {
        WaveFan::Constant { u } => BoundaryResolution { trace: u, mode: BoundaryMode::Attained, emitted: None },
        WaveFan::Shock { speed, .. } => {
            if speed < -tol {
                BoundaryResolution { trace: k, mode: BoundaryMode::Attained, emitted: Some(fan) }
            } else {
                BoundaryResolution { trace: interior, mode: BoundaryMode::Relaxed, emitted: None }
            }
        }
        // interior > k >= theta: every fan speed is <= f'(k) <= 0, and any
        // sub-jump of the split fan travels strictly into the domain.
        WaveFan::Rarefaction { .. } => {
            BoundaryResolution { trace: k, mode: BoundaryMode::Attained, emitted: Some(fan) }
        }
    })
}

/// Boundary resolution for the outgoing road (domain `x > 0`, boundary on the
/// left). Solves the Riemann problem `(k, interior)` and keeps the waves with
/// positive speed.
pub fn resolve_boundary_outgoing(
    model: &FluxModel,
    k: f64,
    interior: f64,
) -> Result<BoundaryResolution, RiemannError> {
    let theta = model.theta();
    if k > theta + crate::flux::ROOT_TOL {
        return Err(RiemannError::BoundaryDatumAboveTheta { k, theta });
    }
    let k = k.min(theta);
    let fan = solve(model, k, interior)?;
    let tol = zero_speed_tol(model);
    Ok(match fan {
        WaveFan::Constant { u } => BoundaryResolution { trace: u, mode: BoundaryMode::Attained, emitted: None },
        WaveFan::Shock { speed, .. } => {
            if speed > tol {
                BoundaryResolution { trace: k, mode: BoundaryMode::Attained, emitted: Some(fan) }
            } else {
                BoundaryResolution { trace: interior, mode: BoundaryMode::Relaxed, emitted: None }
            }
        }
        // k > interior with k <= theta: every fan speed is >= f'(k) >= 0.
        WaveFan::Rarefaction { .. } => {
            BoundaryResolution { trace: k, mode: BoundaryMode::Attained, emitted: Some(fan) }
        }
    })
}
