//! Unbounded `(a + b√2) / √2^c`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::dyadic::{Dyadic, COEFF_MAX};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BigDyadic {
    pub a: BigInt,
    pub b: BigInt,
    pub c: u64,
}

impl BigDyadic {
    pub fn zero() -> BigDyadic {
        BigDyadic { a: BigInt::zero(), b: BigInt::zero(), c: 0 }
    }

    /// Reduced form of `(a + b√2) / √2^c`.
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: u64) -> BigDyadic {
        BigDyadic { a: a.into(), b: b.into(), c }.reduced()
    }

    pub fn from_dyadic(x: Dyadic) -> BigDyadic {
        let (a, b, c) = x.parts();
        BigDyadic { a: a.into(), b: b.into(), c: c as u64 }
    }

    /// `None` when a field does not fit the packed format.
    pub fn to_dyadic(&self) -> Option<Dyadic> {
        let a = self.a.to_i64()?;
        let b = self.b.to_i64()?;
        if a.abs() > COEFF_MAX || b.abs() > COEFF_MAX {
            return None;
        }
        Dyadic::from_reduced_parts(a, b, i64::try_from(self.c).ok()?).ok()
    }

    /// Divides `√2` out of the numerator while the 1-coefficient is even:
    /// `(a + b√2)/√2 = b + (a/2)√2`.
    pub fn reduced(mut self) -> BigDyadic {
        if self.a.is_zero() && self.b.is_zero() {
            return BigDyadic::zero();
        }
        while self.c > 0 && self.a.is_even() {
            let half = &self.a / 2;
            self.a = std::mem::replace(&mut self.b, half);
            self.c -= 1;
        }
        self
    }

    /// Numerator scaled to denominator `√2^c`, `c ≥ self.c`.
    fn lift(&self, c: u64) -> (BigInt, BigInt) {
        let mut a = self.a.clone();
        let mut b = self.b.clone();
        for _ in self.c..c {
            // (a + b√2)·√2 = 2b + a√2
            let na = &b * 2;
            b = a;
            a = na;
        }
        (a, b)
    }

    pub fn add(&self, o: &BigDyadic) -> BigDyadic {
        let c = self.c.max(o.c);
        let (a1, b1) = self.lift(c);
        let (a2, b2) = o.lift(c);
        BigDyadic { a: a1 + a2, b: b1 + b2, c }.reduced()
    }

    pub fn neg(&self) -> BigDyadic {
        BigDyadic { a: -&self.a, b: -&self.b, c: self.c }
    }

    pub fn sub(&self, o: &BigDyadic) -> BigDyadic {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &BigDyadic) -> BigDyadic {
        let a = &self.a * &o.a + (&self.b * &o.b) * 2;
        let b = &self.a * &o.b + &self.b * &o.a;
        BigDyadic { a, b, c: self.c + o.c }.reduced()
    }

    /// Rewrites the value over a power of two, `(p + q√2) / 2^k`, and
    /// conjugates the numerator.
    pub fn twist(&self) -> BigDyadic {
        if self.c.is_multiple_of(2) {
            BigDyadic { a: self.a.clone(), b: -&self.b, c: self.c }.reduced()
        } else {
            // (a + b√2)/√2^c = (2b + a√2)/√2^(c+1)
            let p: BigInt = &self.b * 2;
            BigDyadic { a: p, b: -&self.a, c: self.c + 1 }.reduced()
        }
    }

    pub fn div_sqrt2(&self) -> BigDyadic {
        BigDyadic { a: self.a.clone(), b: self.b.clone(), c: self.c + 1 }.reduced()
    }

    pub fn is_one(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c == 0
    }

    pub fn is_negative_one(&self) -> bool {
        self.a.is_negative() && (-&self.a).is_one() && self.b.is_zero() && self.c == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(a: i64, b: i64, c: u64) -> BigDyadic {
        BigDyadic::new(a, b, c)
    }

    #[test]
    fn reduction_examples() {
        assert_eq!(d(0, 0, 5), BigDyadic::zero());
        assert_eq!(d(1, 1, 0), BigDyadic { a: 1.into(), b: 1.into(), c: 0 });
        assert_eq!(d(2, 2, 2), d(1, 1, 0));
        assert_eq!(d(0, 1, 1), d(1, 0, 0));
    }

    #[test]
    fn arithmetic_examples() {
        assert_eq!(d(1, 0, 1).add(&d(1, 0, 0)), d(1, 1, 1));
        assert_eq!(d(1, 0, 1).add(&d(1, 0, 1)), d(0, 1, 0));
        assert_eq!(d(1, 1, 0).mul(&d(-1, 1, 0)), d(1, 0, 0));
        assert_eq!(d(1, 0, 1).mul(&d(1, 0, 1)), d(1, 0, 2));
        assert_eq!(d(0, 1, 0).div_sqrt2(), d(1, 0, 0));
        assert_eq!(d(1, 1, 0).twist(), d(1, -1, 0));
        assert_eq!(d(1, 0, 1).twist(), d(-1, 0, 1));
        assert_eq!(d(3, 1, 3).twist(), d(-3, 1, 3));
    }

    #[test]
    fn range_gate() {
        assert!(d(1 << 40, 0, 0).to_dyadic().is_none());
        assert!(d(COEFF_MAX + 2, 1, 0).to_dyadic().is_none());
        assert_eq!(d(3, -5, 7).to_dyadic().unwrap().parts(), (3, -5, 7));
    }
}
