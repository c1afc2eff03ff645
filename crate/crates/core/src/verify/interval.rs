//! Interval arithmetic and axis-aligned boxes.
//!
//! Every operation returns a sound enclosure: for all `a ∈ A`, `b ∈ B`,
//! the point result `op(a, b)` (computed in f64 with the same libm calls)
//! lies inside `op(A, B)`. Arithmetic results are widened by one ulp per
//! endpoint, transcendental results by two, to absorb rounding of the
//! underlying f64 operations.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A closed real interval `[lo, hi]`, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn next_up(x: f64) -> f64 {
    if x.is_nan() || x == f64::INFINITY {
        return x;
    }
    let bits = x.to_bits();
    let next = if x == 0.0 {
        1 // smallest positive subnormal
    } else if bits >> 63 == 0 {
        bits + 1
    } else {
        bits - 1
    };
    f64::from_bits(next)
}

fn next_down(x: f64) -> f64 {
    -next_up(-x)
}

/// `0 * anything = 0`; products with an infinite operand otherwise keep
/// their IEEE value. Prevents `0 * inf = NaN` from poisoning bounds.
fn safe_prod(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        a * b
    }
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub const fn point(v: f64) -> Self {
        Interval { lo: v, hi: v }
    }

    pub const ENTIRE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn is_subset_of(&self, other: &Interval) -> bool {
        other.lo <= self.lo && self.hi <= other.hi
    }

    /// Widen each endpoint outward by `ulps` representable steps.
    fn widen(self, ulps: u32) -> Self {
        let mut lo = self.lo;
        let mut hi = self.hi;
        for _ in 0..ulps {
            lo = next_down(lo);
            hi = next_up(hi);
        }
        Interval { lo, hi }
    }

    /// Sharp square: `[0, max(lo², hi²)]` when the interval straddles zero.
    pub fn square(self) -> Self {
        let a = self.lo * self.lo;
        let b = self.hi * self.hi;
        let r = if self.lo >= 0.0 {
            Interval::new(a, b)
        } else if self.hi <= 0.0 {
            Interval::new(b, a)
        } else {
            Interval::new(0.0, a.max(b))
        };
        r.widen(1)
    }

    pub fn abs(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            Interval::new(-self.hi, -self.lo)
        } else {
            Interval::new(0.0, (-self.lo).max(self.hi))
        }
    }

    pub fn max_i(self, other: Interval) -> Self {
        Interval::new(self.lo.max(other.lo), self.hi.max(other.hi))
    }

    pub fn min_i(self, other: Interval) -> Self {
        Interval::new(self.lo.min(other.lo), self.hi.min(other.hi))
    }

    /// Clamp to `[lo, hi]` (monotone, exact).
    pub fn clamp(self, lo: f64, hi: f64) -> Self {
        Interval::new(self.lo.clamp(lo, hi), self.hi.clamp(lo, hi))
    }

    pub fn tanh(self) -> Self {
        Interval::new(self.lo.tanh(), self.hi.tanh()).widen(2)
    }

    pub fn exp(self) -> Self {
        Interval::new(self.lo.exp(), self.hi.exp()).widen(2)
    }

    /// Square root over the nonnegative part of the interval. A partially
    /// negative input is truncated at zero (the enclosure of the function
    /// over its domain); fully negative input is a domain error handled by
    /// [`Interval::checked_sqrt`].
    pub fn sqrt(self) -> Self {
        let lo = if self.lo <= 0.0 { 0.0 } else { self.lo.sqrt() };
        let hi = if self.hi < 0.0 { 0.0 } else { self.hi.sqrt() };
        Interval::new(lo, hi).widen(1)
    }

    pub fn checked_sqrt(self) -> Result<Self> {
        if self.lo < 0.0 {
            return Err(Error::Domain(format!(
                "sqrt of interval [{}, {}] with negative part",
                self.lo, self.hi
            )));
        }
        Ok(self.sqrt())
    }

    pub fn sin(self) -> Self {
        self.periodic_extrema(FRAC_PI_2, -FRAC_PI_2, f64::sin)
    }

    pub fn cos(self) -> Self {
        self.periodic_extrema(0.0, PI, f64::cos)
    }

    /// Shared sin/cos enclosure: endpoint values plus any interior maxima
    /// (at `max_at + 2kπ`) and minima (at `min_at + 2kπ`). Candidate
    /// positions are tested with a small slack so borderline containment
    /// errs toward inclusion (wider, still sound).
    fn periodic_extrema(self, max_at: f64, min_at: f64, f: fn(f64) -> f64) -> Self {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.width() >= 2.0 * PI {
            return Interval::new(-1.0, 1.0);
        }
        let mut lo = f(self.lo).min(f(self.hi));
        let mut hi = f(self.lo).max(f(self.hi));
        let slack = 4.0 * f64::EPSILON * (self.lo.abs().max(self.hi.abs()) + 1.0);
        let k0 = ((self.lo - max_at) / (2.0 * PI)).floor() as i64 - 1;
        let k1 = ((self.hi - max_at) / (2.0 * PI)).floor() as i64 + 1;
        for k in k0..=k1 {
            let x = max_at + 2.0 * PI * k as f64;
            if x >= self.lo - slack && x <= self.hi + slack {
                hi = 1.0;
            }
            let x = min_at + 2.0 * PI * k as f64;
            if x >= self.lo - slack && x <= self.hi + slack {
                lo = -1.0;
            }
        }
        Interval::new(lo, hi).widen(2).clamp(-1.0, 1.0)
    }

    fn contains_tan_pole(&self) -> bool {
        if !self.lo.is_finite() || !self.hi.is_finite() || self.width() >= PI {
            return true;
        }
        let slack = 4.0 * f64::EPSILON * (self.lo.abs().max(self.hi.abs()) + 1.0);
        let k0 = ((self.lo - FRAC_PI_2) / PI).floor() as i64 - 1;
        let k1 = ((self.hi - FRAC_PI_2) / PI).floor() as i64 + 1;
        (k0..=k1).any(|k| {
            let pole = FRAC_PI_2 + PI * k as f64;
            pole >= self.lo - slack && pole <= self.hi + slack
        })
    }

    /// Total tangent: an interval containing (or near) a pole maps to the
    /// whole line, which is the true range over a branch cut and keeps the
    /// extension sound.
    pub fn tan(self) -> Self {
        if self.contains_tan_pole() {
            Interval::ENTIRE
        } else {
            Interval::new(self.lo.tan(), self.hi.tan()).widen(2)
        }
    }

    pub fn checked_tan(self) -> Result<Self> {
        if self.contains_tan_pole() {
            return Err(Error::Domain(format!(
                "tan over interval [{}, {}] crosses an asymptote",
                self.lo, self.hi
            )));
        }
        Ok(self.tan())
    }

    /// Total division: a denominator containing zero yields the whole line.
    pub fn checked_div(self, rhs: Interval) -> Result<Self> {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Err(Error::Domain(format!(
                "division by interval [{}, {}] containing zero",
                rhs.lo, rhs.hi
            )));
        }
        Ok(self / rhs)
    }

    /// Euclidean norm enclosure of a box given per-dimension intervals.
    pub fn norm(dims: &[Interval]) -> Self {
        let mut s = Interval::point(0.0);
        for d in dims {
            s = s + d.square();
        }
        s.sqrt()
    }
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        let lo = self.lo + rhs.lo;
        let hi = self.hi + rhs.hi;
        // inf + (-inf) would be NaN; fall back to the conservative side
        Interval::new(
            if lo.is_nan() { f64::NEG_INFINITY } else { lo },
            if hi.is_nan() { f64::INFINITY } else { hi },
        )
        .widen(1)
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        let lo = self.lo - rhs.hi;
        let hi = self.hi - rhs.lo;
        Interval::new(
            if lo.is_nan() { f64::NEG_INFINITY } else { lo },
            if hi.is_nan() { f64::INFINITY } else { hi },
        )
        .widen(1)
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        let candidates = [
            safe_prod(self.lo, rhs.lo),
            safe_prod(self.lo, rhs.hi),
            safe_prod(self.hi, rhs.lo),
            safe_prod(self.hi, rhs.hi),
        ];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for c in candidates {
            if c.is_nan() {
                continue;
            }
            lo = lo.min(c);
            hi = hi.max(c);
        }
        if lo > hi {
            return Interval::ENTIRE;
        }
        Interval::new(lo, hi).widen(1)
    }
}

impl Div for Interval {
    type Output = Interval;
    fn div(self, rhs: Interval) -> Interval {
        if rhs.lo <= 0.0 && rhs.hi >= 0.0 {
            return Interval::ENTIRE;
        }
        self * Interval::new(1.0 / rhs.hi, 1.0 / rhs.lo).widen(1)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval::new(-self.hi, -self.lo)
    }
}

/// Elementary operations exposed for direct (checked) interval evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Tanh,
    Sin,
    Cos,
    Tan,
    Square,
    Sqrt,
    Abs,
    Exp,
}

/// Checked dispatcher over [`ElementaryOp`]; binary operations require `b`.
/// Domain violations (division by an interval containing zero, tangent
/// across an asymptote, square root of a negative interval) are errors.
pub fn interval_elementary(op: ElementaryOp, a: Interval, b: Option<Interval>) -> Result<Interval> {
    let rhs = || {
        b.ok_or_else(|| Error::Precondition("binary interval op requires two operands".into()))
    };
    Ok(match op {
        ElementaryOp::Add => a + rhs()?,
        ElementaryOp::Sub => a - rhs()?,
        ElementaryOp::Mul => a * rhs()?,
        ElementaryOp::Div => a.checked_div(rhs()?)?,
        ElementaryOp::Neg => -a,
        ElementaryOp::Tanh => a.tanh(),
        ElementaryOp::Sin => a.sin(),
        ElementaryOp::Cos => a.cos(),
        ElementaryOp::Tan => a.checked_tan()?,
        ElementaryOp::Square => a.square(),
        ElementaryOp::Sqrt => a.checked_sqrt()?,
        ElementaryOp::Abs => a.abs(),
        ElementaryOp::Exp => a.exp(),
    })
}

/// Axis-aligned box: one interval per state dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub dims: Vec<Interval>,
}

impl BoxRegion {
    pub fn new(dims: Vec<Interval>) -> Self {
        assert!(!dims.is_empty(), "box must have at least one dimension");
        BoxRegion { dims }
    }

    pub fn from_bounds(bounds: &[[f64; 2]]) -> Self {
        BoxRegion::new(
            bounds
                .iter()
                .map(|b| Interval::new(b[0], b[1]))
                .collect::<Vec<_>>(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn center(&self) -> Vec<f64> {
        self.dims.iter().map(|d| d.midpoint()).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && self.dims.iter().zip(x).all(|(d, &v)| d.contains(v))
    }

    pub fn max_width(&self) -> f64 {
        self.dims.iter().map(|d| d.width()).fold(0.0, f64::max)
    }

    pub fn diameter(&self) -> f64 {
        self.dims
            .iter()
            .map(|d| d.width() * d.width())
            .sum::<f64>()
            .sqrt()
    }

    /// Area (n = 2) or, generally, the volume of the box.
    pub fn volume(&self) -> f64 {
        self.dims.iter().map(|d| d.width()).product()
    }

    /// Index of the widest dimension, lowest index on ties.
    pub fn widest_dim(&self) -> usize {
        let mut best = 0;
        for (i, d) in self.dims.iter().enumerate().skip(1) {
            if d.width() > self.dims[best].width() {
                best = i;
            }
        }
        best
    }

    /// Split along `dim` at the midpoint.
    pub fn split(&self, dim: usize) -> (BoxRegion, BoxRegion) {
        let mid = self.dims[dim].midpoint();
        let mut left = self.clone();
        let mut right = self.clone();
        left.dims[dim].hi = mid;
        right.dims[dim].lo = mid;
        (left, right)
    }

    /// `{a·x : x ∈ self}` for `a > 0`.
    pub fn scale(&self, a: f64) -> BoxRegion {
        BoxRegion::new(
            self.dims
                .iter()
                .map(|d| Interval::new(a * d.lo, a * d.hi))
                .collect(),
        )
    }

    /// The 2n boundary faces as degenerate boxes (one coordinate pinned).
    pub fn faces(&self) -> Vec<BoxRegion> {
        let mut out = Vec::with_capacity(2 * self.dim());
        for i in 0..self.dim() {
            for v in [self.dims[i].lo, self.dims[i].hi] {
                let mut face = self.clone();
                face.dims[i] = Interval::point(v);
                out.push(face);
            }
        }
        out
    }
}
