//! Double-double arithmetic: an unevaluated sum `hi + lo` with
//! `|lo| <= ulp(hi) / 2`, good for about 32 significant digits.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Dd {
    hi: f64,
    lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Requires `|a| >= |b|` or `a == 0`.
#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub const fn from_f64(v: f64) -> Self {
        Dd { hi: v, lo: 0.0 }
    }

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Self {
        let (hi, lo) = quick_two_sum(hi, lo);
        Dd { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        Dd::renorm(p, e + self.lo * b)
    }

    /// `self^n` by repeated squaring.
    pub fn powi(self, mut n: usize) -> Self {
        let (mut base, mut acc) = (self, Dd::ONE);
        while n > 0 {
            if n & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            n >>= 1;
        }
        acc
    }

    /// Square root; zero for non-positive input.
    pub fn sqrt(self) -> Self {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let x = 1.0 / self.hi.sqrt();
        let ax = self.hi * x;
        let (sq, sq_err) = two_prod(ax, ax);
        let rem = (self - Dd { hi: sq, lo: sq_err }).hi;
        let (hi, lo) = two_sum(ax, rem * x * 0.5);
        Dd { hi, lo }
    }
}

impl From<f64> for Dd {
    fn from(v: f64) -> Self {
        Dd::from_f64(v)
    }
}

impl PartialOrd for Dd {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Dd::renorm(s1, s2 + t2)
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        Dd::renorm(p, e + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        Dd::renorm(q1, q2) + Dd::from_f64(q3)
    }
}

impl AddAssign for Dd {
    fn add_assign(&mut self, b: Dd) {
        *self = *self + b;
    }
}

impl SubAssign for Dd {
    fn sub_assign(&mut self, b: Dd) {
        *self = *self - b;
    }
}

impl fmt::Display for Dd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_f64(), f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dd(v: f64) -> Dd {
        Dd::from_f64(v)
    }

    #[test]
    fn thirds() {
        let x = dd(1.0) / dd(3.0);
        let r = x * dd(3.0) - dd(1.0);
        assert!(r.to_f64().abs() < 1e-31, "{:e}", r.to_f64());
        let s = x + x + x - dd(1.0);
        assert!(s.to_f64().abs() < 1e-31);
    }

    #[test]
    fn keeps_bits_below_f64() {
        let tiny = 2f64.powi(-80);
        let s = dd(1.0) + dd(tiny) - dd(1.0);
        assert_eq!(s.to_f64(), tiny);
    }

    #[test]
    fn powers_round_trip() {
        let a = dd(0.7);
        let (mut p, mut q) = (Dd::ONE, Dd::ONE);
        for _ in 0..80 {
            p = p * a;
            q = q / a;
        }
        assert!((p * q - Dd::ONE).to_f64().abs() < 1e-29);
    }

    #[test]
    fn integer_powers() {
        assert_eq!(dd(0.0).powi(0), Dd::ONE);
        assert_eq!(dd(2.0).powi(10).to_f64(), 1024.0);
        let third = Dd::ONE / dd(3.0);
        assert!((third.powi(5) * dd(243.0) - Dd::ONE).to_f64().abs() < 1e-30);
    }

    #[test]
    fn square_root() {
        let r = dd(2.0).sqrt();
        assert!((r * r - dd(2.0)).to_f64().abs() < 1e-31);
        assert_eq!(dd(-1.0).sqrt(), Dd::ZERO);
    }

    #[test]
    fn ordering_uses_low_word() {
        let a = dd(1.0) + dd(1e-20);
        assert!(a > dd(1.0));
        assert!(-a < dd(-1.0));
    }

    proptest! {
        #[test]
        fn division_inverts_multiplication(a in -1e3f64..1e3, b in 0.01f64..1e3) {
            let q = dd(a) / dd(b);
            let back = q * dd(b) - dd(a);
            prop_assert!(back.to_f64().abs() <= 1e-29 * a.abs().max(1.0));
        }

        #[test]
        fn addition_is_exact_for_two_doubles(a in -1e10f64..1e10, b in -1e10f64..1e10) {
            let s = dd(a) + dd(b);
            // the exact sum of two doubles is representable as a double-double
            let (hi, lo) = two_sum(a, b);
            prop_assert_eq!((s.hi(), s.lo()), (hi, lo));
        }
    }
}
