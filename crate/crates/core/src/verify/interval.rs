//! Closed intervals with outward rounding.
//!
//! Every operation widens its result by one ulp at each end, which is enough
//! to absorb the rounding of a single floating-point operation.

use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

fn down<T: Scalar>(v: T) -> T {
    if v.is_finite() {
        v - v.ulp()
    } else {
        v
    }
}

fn up<T: Scalar>(v: T) -> T {
    if v.is_finite() {
        v + v.ulp()
    } else {
        v
    }
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        debug_assert!(lo <= hi, "interval bounds out of order");
        Self { lo, hi }
    }

    pub fn point(v: T) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    pub fn mid(&self) -> T {
        self.lo + (self.hi - self.lo) / T::lit(2.0)
    }

    pub fn contains(&self, v: T) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self::new(self.lo.min(other.lo), self.hi.max(other.hi))
    }

    pub fn split(&self) -> (Self, Self) {
        let m = self.mid();
        (Self::new(self.lo, m), Self::new(m, self.hi))
    }

    /// `self^e`, tight for even powers of intervals straddling zero.
    pub fn powi(&self, e: u32) -> Self {
        if e == 0 {
            return Self::point(T::one());
        }
        let mut base = *self;
        if e % 2 == 0 && self.lo < T::zero() && self.hi > T::zero() {
            let m = self.lo.abs().max(self.hi);
            base = Self::new(T::zero(), m);
        } else if e % 2 == 0 && self.hi <= T::zero() {
            base = Self::new(-self.hi, -self.lo);
        }
        let mut acc = base;
        for _ in 1..e {
            acc = acc * base;
        }
        acc
    }
}

impl<T: Scalar> Add for Interval<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(down(self.lo + o.lo), up(self.hi + o.hi))
    }
}

impl<T: Scalar> Sub for Interval<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(down(self.lo - o.hi), up(self.hi - o.lo))
    }
}

impl<T: Scalar> Neg for Interval<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.hi, -self.lo)
    }
}

impl<T: Scalar> Mul for Interval<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let products = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let (mut lo, mut hi) = (products[0], products[0]);
        for &p in &products[1..] {
            lo = lo.min(p);
            hi = hi.max(p);
        }
        Self::new(down(lo), up(hi))
    }
}

impl<T: Scalar> Mul<T> for Interval<T> {
    type Output = Self;
    fn mul(self, c: T) -> Self {
        self * Self::point(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_encloses_point_results() {
        let a = Interval::new(-1.0, 2.0);
        let b = Interval::new(0.5, 3.0);
        let sum = a + b;
        assert!(sum.lo <= -0.5 && sum.hi >= 5.0);
        let prod = a * b;
        assert!(prod.lo <= -3.0 && prod.hi >= 6.0);
        let diff = a - b;
        assert!(diff.lo <= -4.0 && diff.hi >= 1.5);
    }

    #[test]
    fn even_powers_of_straddling_intervals_are_nonnegative() {
        let sq = Interval::new(-3.0, 2.0).powi(2);
        assert!(sq.lo <= 0.0 && sq.lo > -1e-300 && sq.hi >= 9.0 && sq.hi < 9.0 + 1e-12);
        let cube = Interval::new(-3.0, 2.0).powi(3);
        assert!(cube.lo <= -27.0 && cube.hi >= 8.0);
        let neg_sq = Interval::new(-3.0, -2.0).powi(2);
        assert!(neg_sq.lo <= 4.0 && neg_sq.lo > 3.99 && neg_sq.hi >= 9.0);
        assert_eq!(Interval::new(-3.0, 2.0).powi(0), Interval::point(1.0));
    }

    #[test]
    fn single_precision_intervals() {
        let a = Interval::<f32>::new(0.1, 0.2) * Interval::new(3.0, 4.0);
        assert!(a.lo <= 0.3 && a.hi >= 0.8);
    }
}
