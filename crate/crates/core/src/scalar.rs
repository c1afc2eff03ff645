//! Numeric abstraction shared by plain evaluation, interval bounding, and
//! the autodiff tape. Dynamics, network forward/backward passes, and loss
//! expressions are written once against this trait.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::verify::interval::Interval;

pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Embed a constant "next to" an existing value (the value carries the
    /// evaluation context, e.g. the tape).
    fn lift(&self, c: f64) -> Self;

    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn tanh(self) -> Self;
    fn exp(self) -> Self;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn max(self, other: Self) -> Self;

    fn square(self) -> Self {
        self * self
    }

    /// Identity for concrete number types; blocks derivative flow on the
    /// tape.
    fn stop_gradient(self) -> Self {
        self
    }
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> f64 {
        c
    }
    fn sin(self) -> f64 {
        f64::sin(self)
    }
    fn cos(self) -> f64 {
        f64::cos(self)
    }
    fn tan(self) -> f64 {
        f64::tan(self)
    }
    fn tanh(self) -> f64 {
        f64::tanh(self)
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn max(self, other: f64) -> f64 {
        f64::max(self, other)
    }
}

impl Scalar for Interval {
    fn lift(&self, c: f64) -> Interval {
        Interval::point(c)
    }
    fn sin(self) -> Interval {
        Interval::sin(self)
    }
    fn cos(self) -> Interval {
        Interval::cos(self)
    }
    fn tan(self) -> Interval {
        Interval::tan(self)
    }
    fn tanh(self) -> Interval {
        Interval::tanh(self)
    }
    fn exp(self) -> Interval {
        Interval::exp(self)
    }
    fn sqrt(self) -> Interval {
        Interval::sqrt(self)
    }
    fn abs(self) -> Interval {
        Interval::abs(self)
    }
    fn max(self, other: Interval) -> Interval {
        Interval::max_i(self, other)
    }
    fn square(self) -> Interval {
        Interval::square(self)
    }
}
