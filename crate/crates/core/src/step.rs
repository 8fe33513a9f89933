//! Canonical piecewise-constant functions on an interval, possibly unbounded.
//!
//! The right-continuous representative is stored: `values[i]` holds on
//! `[breaks[i-1], breaks[i])`. Canonical form has strictly increasing
//! breakpoints and distinct adjacent values, so the essential variation is the
//! plain sum of jump magnitudes.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StepError {
    #[error("breakpoints must be strictly increasing inside the interval")]
    BadBreakpoints,
    #[error("need exactly one more value than breakpoints (got {values} values, {breaks} breaks)")]
    BadShape { values: usize, breaks: usize },
    #[error("interval [{lo}, {hi}] is empty")]
    EmptyInterval { lo: f64, hi: f64 },
    #[error("non-finite value in step function data")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    lo: f64,
    hi: f64,
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    pub fn new(lo: f64, hi: f64, breaks: Vec<f64>, values: Vec<f64>) -> Result<Self, StepError> {
        if !(lo < hi) {
            return Err(StepError::EmptyInterval { lo, hi });
        }
        if values.len() != breaks.len() + 1 {
            return Err(StepError::BadShape { values: values.len(), breaks: breaks.len() });
        }
        if values.iter().any(|v| !v.is_finite()) || breaks.iter().any(|b| !b.is_finite()) {
            return Err(StepError::NonFinite);
        }
        if breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(StepError::BadBreakpoints);
        }
        if let (Some(first), Some(last)) = (breaks.first(), breaks.last()) {
            if *first <= lo || *last >= hi {
                return Err(StepError::BadBreakpoints);
            }
        }
        let mut f = StepFunction { lo, hi, breaks, values };
        f.canonicalize();
        Ok(f)
    }

    pub fn constant(lo: f64, hi: f64, v: f64) -> Self {
        StepFunction { lo, hi, breaks: Vec::new(), values: vec![v] }
    }

    /// Builds from possibly degenerate data: breakpoints only need to be
    /// non-decreasing, zero-width pieces are dropped.
    pub fn from_unnormalized(lo: f64, hi: f64, breaks: &[f64], values: &[f64]) -> Self {
        assert_eq!(values.len(), breaks.len() + 1);
        let mut bs = Vec::with_capacity(breaks.len());
        let mut vs = Vec::with_capacity(values.len());
        vs.push(values[0]);
        for (i, &b) in breaks.iter().enumerate() {
            if b <= lo {
                // piece entirely left of the interval: its value replaces the head
                *vs.last_mut().unwrap() = values[i + 1];
                continue;
            }
            if b >= hi {
                break;
            }
            if let Some(&prev) = bs.last() {
                if b <= prev {
                    // zero-width piece: overwrite the value after `prev`
                    *vs.last_mut().unwrap() = values[i + 1];
                    continue;
                }
            }
            bs.push(b);
            vs.push(values[i + 1]);
        }
        let mut f = StepFunction { lo, hi, breaks: bs, values: vs };
        f.canonicalize();
        f
    }

    fn canonicalize(&mut self) {
        let mut bs = Vec::with_capacity(self.breaks.len());
        let mut vs = Vec::with_capacity(self.values.len());
        vs.push(self.values[0]);
        for (i, &b) in self.breaks.iter().enumerate() {
            let next = self.values[i + 1];
            if next == *vs.last().unwrap() {
                continue;
            }
            bs.push(b);
            vs.push(next);
        }
        self.breaks = bs;
        self.values = vs;
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Right-continuous evaluation; at a breakpoint the right piece wins.
    pub fn value_at(&self, x: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b <= x);
        self.values[i]
    }

    /// Left limit at `x`.
    pub fn limit_left(&self, x: f64) -> f64 {
        let i = self.breaks.partition_point(|&b| b < x);
        self.values[i]
    }

    /// Value of the first piece (the right limit at the interval start).
    pub fn first_value(&self) -> f64 {
        self.values[0]
    }

    /// Value of the last piece (the left limit at the interval end).
    pub fn last_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// Pieces clipped to `(a, b)`, skipping empty ones.
    pub fn pieces_in(&self, a: f64, b: f64) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::new();
        let mut start = a.max(self.lo);
        let hi = b.min(self.hi);
        if !(start < hi) {
            return out;
        }
        let mut i = self.breaks.partition_point(|&bk| bk <= start);
        while start < hi {
            let end = if i < self.breaks.len() { self.breaks[i].min(hi) } else { hi };
            if end > start {
                out.push((start, end, self.values[i]));
            }
            start = end;
            i += 1;
        }
        out
    }

    /// Exact integral over `(a, b)`; both ends must be finite.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        assert!(a.is_finite() && b.is_finite(), "integral needs finite bounds");
        self.pieces_in(a, b).iter().map(|(s, e, v)| (e - s) * v).sum()
    }

    /// Sum of jump magnitudes strictly inside `(a, b)` (essential variation of
    /// the right-continuous representative).
    pub fn essential_tv(&self, a: f64, b: f64) -> f64 {
        let mut tv = 0.0;
        for (i, &bk) in self.breaks.iter().enumerate() {
            if bk > a && bk < b {
                tv += (self.values[i + 1] - self.values[i]).abs();
            }
        }
        tv
    }

    /// Essential variation over the whole interval of definition.
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    /// Interior variation plus the endpoint jump magnitudes `|g(c+)-g(c-)|`
    /// and `|g(d+)-g(d-)|`.
    pub fn closed_tv(&self, c: f64, d: f64) -> f64 {
        self.essential_tv(c, d)
            + (self.value_at(c) - self.limit_left(c)).abs()
            + (self.value_at(d) - self.limit_left(d)).abs()
    }

    /// Applies `f` to every value (composition `f . g`).
    pub fn map(&self, f: impl Fn(f64) -> f64) -> StepFunction {
        let mut out = StepFunction {
            lo: self.lo,
            hi: self.hi,
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        };
        out.canonicalize();
        out
    }

    /// Restriction to `(a, b) ∩ (lo, hi)`.
    pub fn restrict(&self, a: f64, b: f64) -> StepFunction {
        let lo = a.max(self.lo);
        let hi = b.min(self.hi);
        assert!(lo < hi, "empty restriction ({a}, {b})");
        let mut breaks = Vec::new();
        let mut values = vec![self.value_at(if lo.is_finite() { lo } else { f64::NEG_INFINITY })];
        for (i, &bk) in self.breaks.iter().enumerate() {
            if bk > lo && bk < hi {
                breaks.push(bk);
                values.push(self.values[i + 1]);
            }
        }
        let mut f = StepFunction { lo, hi, breaks, values };
        f.canonicalize();
        f
    }

    /// Replaces this function on `(a, b)` by `other` (which must cover it).
    pub fn splice(&self, a: f64, b: f64, other: &StepFunction) -> StepFunction {
        let mut breaks = Vec::new();
        let mut values = vec![if a > self.lo { self.first_value() } else { other.value_at(a) }];
        let segments = [
            self.pieces_in(self.lo, a),
            other.pieces_in(a, b),
            self.pieces_in(b, self.hi),
        ];
        for (s, _e, v) in segments.into_iter().flatten() {
            if s > self.lo {
                breaks.push(s);
                values.push(v);
            } else {
                values[0] = v;
            }
        }
        StepFunction::from_unnormalized(self.lo, self.hi, &breaks, &values)
    }

    /// Common refinement with `other` over `(a, b)`: disjoint intervals
    /// `(start, end, self value, other value)`.
    pub fn refine_with(&self, other: &StepFunction, a: f64, b: f64) -> Vec<(f64, f64, f64, f64)> {
        let mut cuts: Vec<f64> = Vec::new();
        cuts.push(a);
        cuts.push(b);
        for &bk in self.breaks.iter().chain(other.breaks.iter()) {
            if bk > a && bk < b {
                cuts.push(bk);
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        cuts.dedup();
        let mut out = Vec::with_capacity(cuts.len());
        for w in cuts.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            out.push((w[0], w[1], self.value_at(mid), other.value_at(mid)));
        }
        out
    }

    /// Largest absolute difference to `other` over `(a, b)`, ignoring
    /// refinement slivers narrower than `min_width`. Returns the gap and the
    /// start of the worst interval.
    pub fn sup_distance(&self, other: &StepFunction, a: f64, b: f64, min_width: f64) -> (f64, f64) {
        let mut worst = (0.0f64, a);
        for (s, e, v1, v2) in self.refine_with(other, a, b) {
            if e - s <= min_width {
                continue;
            }
            let d = (v1 - v2).abs();
            if d > worst.0 {
                worst = (d, s);
            }
        }
        worst
    }

    /// First time in `(a, b)` where the gap to `other` exceeds `threshold`
    /// on an interval wider than `min_width`.
    pub fn first_divergence(
        &self,
        other: &StepFunction,
        a: f64,
        b: f64,
        threshold: f64,
        min_width: f64,
    ) -> Option<f64> {
        self.refine_with(other, a, b)
            .into_iter()
            .find(|(s, e, v1, v2)| e - s > min_width && (v1 - v2).abs() > threshold)
            .map(|(s, ..)| s)
    }

    /// `∫ (self - other)_+` over `(a, b)`.
    pub fn l1_positive_part(&self, other: &StepFunction, a: f64, b: f64) -> f64 {
        self.refine_with(other, a, b)
            .into_iter()
            .map(|(s, e, v1, v2)| (e - s) * (v1 - v2).max(0.0))
            .sum()
    }

    /// `∫ |self - other|` over `(a, b)`.
    pub fn l1_distance(&self, other: &StepFunction, a: f64, b: f64) -> f64 {
        self.refine_with(other, a, b)
            .into_iter()
            .map(|(s, e, v1, v2)| (e - s) * (v1 - v2).abs())
            .sum()
    }

    /// Worst monotonicity violation: largest upward jump for `NonIncreasing`,
    /// largest downward jump for `NonDecreasing`.
    pub fn monotonicity_violation(&self, direction: Monotonicity) -> f64 {
        let mut worst = 0.0f64;
        for w in self.values.windows(2) {
            let jump = w[1] - w[0];
            let bad = match direction {
                Monotonicity::NonDecreasing => -jump,
                Monotonicity::NonIncreasing => jump,
            };
            worst = worst.max(bad);
        }
        worst
    }

    pub fn is_monotone(&self, direction: Monotonicity, tol: f64) -> bool {
        self.monotonicity_violation(direction) <= tol
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    NonDecreasing,
    NonIncreasing,
}
