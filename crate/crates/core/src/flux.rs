//! Concave flux models: evaluation, branch inverses, companion states and
//! Rankine-Hugoniot speeds.
//!
//! A model represents a twice continuously differentiable, uniformly strictly
//! concave flux `f` with a unique maximum at the critical state `theta`,
//! restricted to a finite working range `[u_lo, u_hi]` that must contain all
//! data a solver run can touch. The free branch is `u <= theta` (`f' >= 0`),
//! the congested branch `u >= theta`.

use thiserror::Error;

/// Absolute tolerance on flux values for root finding and branch checks.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FluxError {
    #[error("state {u} outside working range [{lo}, {hi}]")]
    OutOfDomain { u: f64, lo: f64, hi: f64 },
    #[error("flux value {q} exceeds the maximum {max}")]
    AboveMaximum { q: f64, max: f64 },
    #[error("flux value {q} below the {branch:?} branch range (minimum {min})")]
    BranchRange { q: f64, branch: Branch, min: f64 },
    #[error("degenerate jump between {ul} and {ur}")]
    DegenerateJump { ul: f64, ur: f64 },
    #[error("invalid flux model: {0}")]
    InvalidModel(String),
}

/// Side of the critical state: `Free` is `u <= theta`, `Congested` is `u >= theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Free,
    Congested,
}

#[derive(Debug, Clone)]
enum Family {
    /// `f(u) = alpha * u * (beta - u) + offset`, `alpha > 0`.
    Quadratic { alpha: f64, beta: f64, offset: f64 },
    /// `f(u) = -u^2 / 2`.
    NegHalfSquare,
    /// Monotone cubic interpolant of concave samples, one branch each side of
    /// the maximum; inverses by bisection.
    Tabulated(Pchip),
}

#[derive(Debug, Clone)]
pub struct FluxModel {
    family: Family,
    u_lo: f64,
    u_hi: f64,
    theta: f64,
    concavity_margin: f64,
}

impl FluxModel {
    /// Quadratic family `f(u) = alpha*u*(beta-u) + offset` on `[u_lo, u_hi]`.
    pub fn quadratic(alpha: f64, beta: f64, offset: f64, u_lo: f64, u_hi: f64) -> Result<Self, FluxError> {
        if !(alpha > 0.0) || !alpha.is_finite() || !beta.is_finite() || !offset.is_finite() {
            return Err(FluxError::InvalidModel(format!(
                "quadratic family needs finite parameters and alpha > 0, got alpha={alpha}, beta={beta}, offset={offset}"
            )));
        }
        let theta = beta / 2.0;
        if !(u_lo < u_hi) || theta < u_lo || theta > u_hi {
            return Err(FluxError::InvalidModel(format!(
                "working range [{u_lo}, {u_hi}] must be ordered and contain theta={theta}"
            )));
        }
        Ok(FluxModel {
            family: Family::Quadratic { alpha, beta, offset },
            u_lo,
            u_hi,
            theta,
            concavity_margin: 2.0 * alpha,
        })
    }

    /// The standard LWR instance `f(u) = u(1-u)` on `[0, 1]`.
    pub fn lwr() -> Self {
        Self::quadratic(1.0, 1.0, 0.0, 0.0, 1.0).unwrap()
    }

    /// `f(u) = -u^2/2` on `[u_lo, u_hi]`, maximum at 0.
    pub fn neg_half_square(u_lo: f64, u_hi: f64) -> Result<Self, FluxError> {
        if !(u_lo < 0.0 && 0.0 < u_hi) {
            return Err(FluxError::InvalidModel(format!(
                "working range [{u_lo}, {u_hi}] must straddle the maximum at 0"
            )));
        }
        Ok(FluxModel {
            family: Family::NegHalfSquare,
            u_lo,
            u_hi,
            theta: 0.0,
            concavity_margin: 1.0,
        })
    }

    /// Concave samples `(grid, values)` interpolated by a monotone cubic per
    /// branch. Best-effort support: inverses fall back to bisection.
    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self, FluxError> {
        if grid.len() != values.len() || grid.len() < 4 {
            return Err(FluxError::InvalidModel(
                "tabulated flux needs at least 4 matching samples".into(),
            ));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(FluxError::InvalidModel("sample grid must be strictly increasing".into()));
        }
        // Discrete uniform concavity: slopes strictly decreasing.
        let mut margin = f64::INFINITY;
        for i in 1..grid.len() - 1 {
            let dl = (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]);
            let dr = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
            let curv = 2.0 * (dl - dr) / (grid[i + 1] - grid[i - 1]);
            if curv <= 0.0 {
                return Err(FluxError::InvalidModel(format!(
                    "samples are not strictly concave near x={}",
                    grid[i]
                )));
            }
            margin = margin.min(curv);
        }
        let u_lo = grid[0];
        let u_hi = *grid.last().unwrap();
        let pchip = Pchip::new(grid, values);
        let theta = pchip.argmax();
        Ok(FluxModel {
            family: Family::Tabulated(pchip),
            u_lo,
            u_hi,
            theta,
            concavity_margin: margin,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn range(&self) -> (f64, f64) {
        (self.u_lo, self.u_hi)
    }

    /// `max f = f(theta)`.
    pub fn max_flux(&self) -> f64 {
        self.f(self.theta)
    }

    pub fn concavity_margin(&self) -> f64 {
        self.concavity_margin
    }

    /// Largest characteristic speed over the working range.
    pub fn max_wave_speed(&self) -> f64 {
        self.fp(self.u_lo).abs().max(self.fp(self.u_hi).abs())
    }

    pub fn contains(&self, u: f64) -> bool {
        // Loose by one root tolerance so states produced by inverses stay legal.
        u.is_finite() && u >= self.u_lo - ROOT_TOL && u <= self.u_hi + ROOT_TOL
    }

    fn check(&self, u: f64) -> Result<(), FluxError> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(FluxError::OutOfDomain { u, lo: self.u_lo, hi: self.u_hi })
        }
    }

    /// Unchecked flux evaluation; callers guarantee `u` is in range.
    pub(crate) fn f(&self, u: f64) -> f64 {
        match &self.family {
            Family::Quadratic { alpha, beta, offset } => alpha * u * (beta - u) + offset,
            Family::NegHalfSquare => -0.5 * u * u,
            Family::Tabulated(p) => p.eval(u),
        }
    }

    /// Unchecked derivative `f'(u)`.
    pub(crate) fn fp(&self, u: f64) -> f64 {
        match &self.family {
            Family::Quadratic { alpha, beta, .. } => alpha * (beta - 2.0 * u),
            Family::NegHalfSquare => -u,
            Family::Tabulated(p) => p.deriv(u),
        }
    }

    /// `f(u)` with a domain check.
    pub fn eval(&self, u: f64) -> Result<f64, FluxError> {
        self.check(u)?;
        Ok(self.f(u))
    }

    /// `f'(u)` with a domain check; positive exactly on the free branch.
    pub fn deriv(&self, u: f64) -> Result<f64, FluxError> {
        self.check(u)?;
        Ok(self.fp(u))
    }

    /// Unique `u` on the requested branch with `f(u) = q`.
    pub fn branch_inverse(&self, branch: Branch, q: f64) -> Result<f64, FluxError> {
        let max = self.max_flux();
        if q > max + ROOT_TOL {
            return Err(FluxError::AboveMaximum { q, max });
        }
        let q = q.min(max);
        let end = match branch {
            Branch::Free => self.u_lo,
            Branch::Congested => self.u_hi,
        };
        let min = self.f(end);
        if q < min - ROOT_TOL {
            return Err(FluxError::BranchRange { q, branch, min });
        }
        let q_eff = q.max(min);
        let u = match &self.family {
            Family::Quadratic { alpha, beta, offset } => {
                let disc = (beta * beta - 4.0 * (q_eff - offset) / alpha).max(0.0);
                match branch {
                    Branch::Free => (beta - disc.sqrt()) / 2.0,
                    Branch::Congested => (beta + disc.sqrt()) / 2.0,
                }
            }
            Family::NegHalfSquare => {
                let r = (-2.0 * q_eff).max(0.0).sqrt();
                match branch {
                    Branch::Free => -r,
                    Branch::Congested => r,
                }
            }
            Family::Tabulated(_) => {
                let (mut a, mut b) = match branch {
                    Branch::Free => (self.u_lo, self.theta),
                    Branch::Congested => (self.theta, self.u_hi),
                };
                // f is monotone on each branch; bisect to ROOT_TOL in flux value.
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let increasing = matches!(branch, Branch::Free);
                    if (self.f(m) < q_eff) == increasing {
                        a = m;
                    } else {
                        b = m;
                    }
                    if (b - a).abs() < ROOT_TOL {
                        break;
                    }
                }
                0.5 * (a + b)
            }
        };
        Ok(u.clamp(self.u_lo, self.u_hi))
    }

    /// State on the opposite side of `theta` with the same flux value.
    pub fn companion(&self, u: f64) -> Result<f64, FluxError> {
        self.check(u)?;
        let branch = if u <= self.theta { Branch::Congested } else { Branch::Free };
        match self.branch_inverse(branch, self.f(u)) {
            Ok(v) => Ok(v),
            // The mirror state may fall outside the working box; callers treat
            // that the same as an out-of-range state.
            Err(FluxError::BranchRange { .. }) => Err(FluxError::OutOfDomain {
                u,
                lo: self.u_lo,
                hi: self.u_hi,
            }),
            Err(e) => Err(e),
        }
    }

    /// Rankine-Hugoniot speed `(f(ur) - f(ul)) / (ur - ul)`.
    pub fn shock_speed(&self, ul: f64, ur: f64) -> Result<f64, FluxError> {
        if (ul - ur).abs() < 1e-14 {
            return Err(FluxError::DegenerateJump { ul, ur });
        }
        self.check(ul)?;
        self.check(ur)?;
        Ok((self.f(ur) - self.f(ul)) / (ur - ul))
    }

    /// Inverse of `f'` (self-similar rarefaction profile), clamped to the
    /// working range.
    pub fn deriv_inverse(&self, slope: f64) -> f64 {
        let u = match &self.family {
            Family::Quadratic { alpha, beta, .. } => (beta - slope / alpha) / 2.0,
            Family::NegHalfSquare => -slope,
            Family::Tabulated(_) => {
                // f' is strictly decreasing.
                let (mut a, mut b) = (self.u_lo, self.u_hi);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if self.fp(m) > slope {
                        a = m;
                    } else {
                        b = m;
                    }
                    if (b - a).abs() < ROOT_TOL {
                        break;
                    }
                }
                0.5 * (a + b)
            }
        };
        u.clamp(self.u_lo, self.u_hi)
    }
}

/// Fritsch-Carlson monotone cubic Hermite interpolant.
#[derive(Debug, Clone)]
struct Pchip {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ms: Vec<f64>,
}

impl Pchip {
    fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        let n = xs.len();
        let mut d = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            d.push((ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]));
        }
        let mut ms = vec![0.0; n];
        ms[0] = d[0];
        ms[n - 1] = d[n - 2];
        for i in 1..n - 1 {
            if d[i - 1] * d[i] <= 0.0 {
                ms[i] = 0.0;
            } else {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                ms[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        Pchip { xs, ys, ms }
    }

    fn segment(&self, x: f64) -> usize {
        match self.xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
            Ok(i) => i.min(self.xs.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.xs.len() - 2),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (h00, h10, h01, h11) = hermite(t);
        h00 * self.ys[i] + h10 * h * self.ms[i] + h01 * self.ys[i + 1] + h11 * h * self.ms[i + 1]
    }

    fn deriv(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let dh00 = (6.0 * t * t - 6.0 * t) / h;
        let dh10 = 3.0 * t * t - 4.0 * t + 1.0;
        let dh01 = -dh00;
        let dh11 = 3.0 * t * t - 2.0 * t;
        dh00 * self.ys[i] + dh10 * self.ms[i] + dh01 * self.ys[i + 1] + dh11 * self.ms[i + 1]
    }

    fn argmax(&self) -> f64 {
        let mut best = 0;
        for (i, y) in self.ys.iter().enumerate() {
            if *y > self.ys[best] {
                best = i;
            }
        }
        let lo = self.xs[best.saturating_sub(1)];
        let hi = self.xs[(best + 1).min(self.xs.len() - 1)];
        // f' decreasing: bisect for the zero of the derivative.
        let (mut a, mut b) = (lo, hi);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.deriv(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
            if (b - a).abs() < ROOT_TOL {
                break;
            }
        }
        0.5 * (a + b)
    }
}

fn hermite(t: f64) -> (f64, f64, f64, f64) {
    let t2 = t * t;
    let t3 = t2 * t;
    (
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn lwr() -> FluxModel {
        FluxModel::lwr()
    }

    #[test]
    fn eval_lwr() {
        let m = lwr();
        assert!((m.eval(0.5).unwrap() - 0.25).abs() < 1e-15);
        assert_eq!(m.eval(0.0).unwrap(), 0.0);
        assert!((m.eval(0.3).unwrap() - 0.21).abs() < 1e-15);
        assert!(m.eval(1.5).is_err());
    }

    #[test]
    fn deriv_values() {
        let m = lwr();
        assert_eq!(m.deriv(0.5).unwrap(), 0.0);
        assert!((m.deriv(0.7).unwrap() + 0.4).abs() < 1e-15);
        let n = FluxModel::neg_half_square(-2.0, 2.0).unwrap();
        assert!((n.deriv(1.0).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn branch_inverse_lwr() {
        let m = lwr();
        assert!((m.branch_inverse(Branch::Congested, 0.21).unwrap() - 0.7).abs() < 1e-12);
        assert!((m.branch_inverse(Branch::Free, 0.25).unwrap() - 0.5).abs() < 1e-7);
        assert!((m.branch_inverse(Branch::Free, 0.24).unwrap() - 0.4).abs() < 1e-12);
        assert!(matches!(
            m.branch_inverse(Branch::Free, 0.26),
            Err(FluxError::AboveMaximum { .. })
        ));
        assert!(matches!(
            m.branch_inverse(Branch::Free, -0.1),
            Err(FluxError::BranchRange { .. })
        ));
    }

    #[test]
    fn companion_lwr() {
        let m = lwr();
        assert!((m.companion(0.3).unwrap() - 0.7).abs() < 1e-12);
        assert!((m.companion(0.5).unwrap() - 0.5).abs() < 1e-6);
        assert!((m.companion(0.2).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn shock_speeds() {
        let m = lwr();
        assert!((m.shock_speed(0.1, 0.4).unwrap() - 0.5).abs() < 1e-12);
        assert!(m.shock_speed(0.3, 0.7).unwrap().abs() < 1e-12);
        assert!((m.shock_speed(0.2, 0.7).unwrap() - 0.1).abs() < 1e-12);
        assert!(matches!(
            m.shock_speed(0.3, 0.3),
            Err(FluxError::DegenerateJump { .. })
        ));
    }

    #[test]
    fn companion_preserves_flux() {
        let m = lwr();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let u: f64 = rng.gen_range(0.0..1.0);
            let v = m.companion(u).unwrap();
            assert!((m.f(u) - m.f(v)).abs() < 1e-12, "u={u} v={v}");
            assert!((m.companion(v).unwrap() - u).abs() < 1e-10);
        }
    }

    #[test]
    fn branch_inverse_round_trip() {
        let m = lwr();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let u: f64 = rng.gen_range(0.0..1.0);
            let branch = if u <= m.theta() { Branch::Free } else { Branch::Congested };
            let back = m.branch_inverse(branch, m.f(u)).unwrap();
            assert!((back - u).abs() < 1e-10, "u={u} back={back}");
        }
    }

    #[test]
    fn lax_inequalities() {
        let m = lwr();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let a: f64 = rng.gen_range(0.0..1.0);
            let b: f64 = rng.gen_range(0.0..1.0);
            let (ul, ur) = (a.min(b), a.max(b));
            if ur - ul < 1e-6 {
                continue;
            }
            let s = m.shock_speed(ul, ur).unwrap();
            assert!(m.fp(ur) < s + 1e-12 && s < m.fp(ul) + 1e-12);
        }
    }

    #[test]
    fn deriv_matches_finite_differences() {
        let m = lwr();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = 1e-6;
        for _ in 0..1000 {
            let u: f64 = rng.gen_range(0.01..0.99);
            let fd = (m.f(u + h) - m.f(u - h)) / (2.0 * h);
            let d = m.fp(u);
            let scale = d.abs().max(1.0);
            assert!((fd - d).abs() / scale < 1e-6, "u={u} fd={fd} d={d}");
        }
    }

    #[test]
    fn tabulated_tracks_quadratic() {
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 / 40.0).collect();
        let vals: Vec<f64> = grid.iter().map(|u| u * (1.0 - u)).collect();
        let t = FluxModel::tabulated(grid, vals).unwrap();
        assert!((t.theta() - 0.5).abs() < 1e-3);
        for &u in &[0.1, 0.33, 0.61, 0.9] {
            assert!((t.eval(u).unwrap() - u * (1.0 - u)).abs() < 1e-3);
        }
        let q = 0.21;
        let inv = t.branch_inverse(Branch::Congested, q).unwrap();
        assert!((t.eval(inv).unwrap() - q).abs() < 1e-9);
    }

    #[test]
    fn tabulated_rejects_nonconcave() {
        let grid = vec![0.0, 1.0, 2.0, 3.0, 4.0];
        let vals = vec![0.0, 1.0, 1.5, 2.5, 2.6];
        assert!(FluxModel::tabulated(grid, vals).is_err());
    }
}
