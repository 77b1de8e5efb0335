//! Scalar abstraction for writing numeric code once and evaluating it either
//! plainly (`f64`) or with forward-mode derivatives ([`Dual`]).
//!
//! The strategy is forward mode with a fixed number `N` of simultaneous
//! tangent directions: a `Dual<N>` carries a value and `N` directional
//! derivatives, and arithmetic propagates all of them through the exact sum,
//! product, and chain rules. Seeding the `N` canonical directions of an
//! `N`-dimensional input therefore yields a full Jacobian in one pass.
//!
//! The value component of every operation is computed with exactly the same
//! `f64` expression a plain evaluation would use, so value passes are bitwise
//! identical to their non-differentiated counterparts.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Operations required of a differentiable scalar.
///
/// Tie-breaking for `min`/`max` is deterministic: at equal values the result
/// (and hence the derivative) is taken from the first argument.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;
    fn atan2(self, other: Self) -> Self;
    fn min(self, other: Self) -> Self;
    fn max(self, other: Self) -> Self;
}

impl Real for f64 {
    #[inline]
    fn constant(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    #[inline]
    fn atan2(self, other: Self) -> Self {
        f64::atan2(self, other)
    }
    #[inline]
    fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }
    #[inline]
    fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

/// Forward-mode dual number with `N` tangent directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dual<const N: usize> {
    pub v: f64,
    pub d: [f64; N],
}

impl<const N: usize> Dual<N> {
    /// A variable seeded as the `dir`-th input direction.
    pub fn variable(v: f64, dir: usize) -> Self {
        let mut d = [0.0; N];
        d[dir] = 1.0;
        Dual { v, d }
    }
}

impl<const N: usize> Add for Dual<N> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(rhs.d.iter()) {
            *a += *b;
        }
        Dual { v: self.v + rhs.v, d }
    }
}

impl<const N: usize> Sub for Dual<N> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(rhs.d.iter()) {
            *a -= *b;
        }
        Dual { v: self.v - rhs.v, d }
    }
}

impl<const N: usize> Mul for Dual<N> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = self.d[i] * rhs.v + self.v * rhs.d[i];
        }
        Dual { v: self.v * rhs.v, d }
    }
}

impl<const N: usize> Div for Dual<N> {
    type Output = Self;
    #[inline]
    fn div(self, rhs: Self) -> Self {
        let v = self.v / rhs.v;
        let inv = 1.0 / rhs.v;
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = (self.d[i] - v * rhs.d[i]) * inv;
        }
        Dual { v, d }
    }
}

impl<const N: usize> Neg for Dual<N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        let mut d = self.d;
        for a in d.iter_mut() {
            *a = -*a;
        }
        Dual { v: -self.v, d }
    }
}

impl<const N: usize> Real for Dual<N> {
    #[inline]
    fn constant(v: f64) -> Self {
        Dual { v, d: [0.0; N] }
    }

    #[inline]
    fn value(self) -> f64 {
        self.v
    }

    #[inline]
    fn sin(self) -> Self {
        let c = self.v.cos();
        let mut d = self.d;
        for a in d.iter_mut() {
            *a *= c;
        }
        Dual { v: self.v.sin(), d }
    }

    #[inline]
    fn cos(self) -> Self {
        let s = -self.v.sin();
        let mut d = self.d;
        for a in d.iter_mut() {
            *a *= s;
        }
        Dual { v: self.v.cos(), d }
    }

    #[inline]
    fn sqrt(self) -> Self {
        let v = self.v.sqrt();
        let scale = 0.5 / v;
        let mut d = self.d;
        for a in d.iter_mut() {
            *a *= scale;
        }
        Dual { v, d }
    }

    #[inline]
    fn atan2(self, other: Self) -> Self {
        // d/dt atan2(y, x) = (x*dy - y*dx) / (x^2 + y^2)
        let y = self.v;
        let x = other.v;
        let denom = x * x + y * y;
        let mut d = [0.0; N];
        for i in 0..N {
            d[i] = (x * self.d[i] - y * other.d[i]) / denom;
        }
        Dual {
            v: y.atan2(x),
            d,
        }
    }

    #[inline]
    fn min(self, other: Self) -> Self {
        if self.v <= other.v {
            self
        } else {
            other
        }
    }

    #[inline]
    fn max(self, other: Self) -> Self {
        if self.v >= other.v {
            self
        } else {
            other
        }
    }
}
