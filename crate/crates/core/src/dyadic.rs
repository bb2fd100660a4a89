//! Exact arithmetic in Z[1/√2].
//!
//! A [`Dyadic`] is the value `(a + b√2) / √2^c` stored in a single 64-bit word:
//!
//! ```text
//!  63            37 36            10 9        0
//! +----------------+----------------+----------+
//! |  a (27 bits)   |  b (27 bits)   | c (10 b) |
//! +----------------+----------------+----------+
//! ```
//!
//! `a` and `b` are two's-complement, `c` is unsigned. Every value has exactly
//! one encoding: zero is the all-zero word, and a nonzero value with `c > 0`
//! always has odd `a`. When `c == 0` the value lies in Z[√2] and no further
//! division by √2 is possible, so `a` may be even there (`√2` itself is
//! `(0, 1, 0)`). Because of this, packed-word equality is value equality.
//!
//! The coefficient range is kept symmetric (`|a|, |b| <= 2^26 - 1`) so that
//! negation is total.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use thiserror::Error;

const C_BITS: u32 = 10;
const COEFF_BITS: u32 = 27;
const B_SHIFT: u32 = C_BITS;
const A_SHIFT: u32 = C_BITS + COEFF_BITS;
const C_MASK: u64 = (1 << C_BITS) - 1;
const COEFF_MASK: u64 = (1 << COEFF_BITS) - 1;

/// Largest admissible magnitude of either numerator coefficient.
pub const COEFF_MAX: i64 = (1 << (COEFF_BITS - 1)) - 1;
/// Largest admissible denominator exponent.
pub const EXP_MAX: u32 = (1 << C_BITS) - 1;

const KEY_BIAS: i64 = 1 << (COEFF_BITS - 1);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DyadicError {
    #[error("numerator coefficient out of range (|a|, |b| must be <= {COEFF_MAX})")]
    CoefficientOverflow,
    #[error("denominator exponent out of range (c must be <= {EXP_MAX})")]
    ExponentOverflow,
    #[error("negative denominator exponent {0}")]
    NegativeExponent(i64),
    #[error("encoding ({a},{b},{c}) is not reduced")]
    NotReduced { a: i64, b: i64, c: i64 },
    #[error("malformed dyadic literal {0:?}")]
    Syntax(String),
}

/// An element of Z[1/√2] in reduced packed form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
#[repr(transparent)]
pub struct Dyadic(u64);

/// What happened inside one addition, for checking the alignment argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddTrace {
    /// Integer coefficient of the aligned sum, before any reduction.
    pub aligned_a: i64,
    /// Number of √2 divisions the reduction loop performed.
    pub reduce_steps: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic(0);
    pub const ONE: Dyadic = Dyadic(1 << A_SHIFT);
    pub const MINUS_ONE: Dyadic = Dyadic(COEFF_MASK << A_SHIFT);
    /// `1/√2`
    pub const INV_SQRT2: Dyadic = Dyadic((1 << A_SHIFT) | 1);

    /// Builds the reduced encoding of `(a + b√2)/√2^c` from arbitrary parts.
    pub fn new(a: i64, b: i64, c: i64) -> Result<Dyadic, DyadicError> {
        reduce_wide(a as i128, b as i128, c).map(|(d, _)| d)
    }

    /// Accepts parts that must already be reduced; used by parsers.
    pub fn from_reduced_parts(a: i64, b: i64, c: i64) -> Result<Dyadic, DyadicError> {
        if c < 0 {
            return Err(DyadicError::NegativeExponent(c));
        }
        let zero = a == 0 && b == 0;
        let reduced = if zero { c == 0 } else { c == 0 || a & 1 == 1 };
        if !reduced {
            return Err(DyadicError::NotReduced { a, b, c });
        }
        pack(a, b, c)
    }

    /// Decodes a packed word, rejecting non-canonical encodings.
    pub fn from_bits(bits: u64) -> Result<Dyadic, DyadicError> {
        let d = Dyadic(bits);
        let (a, b, c) = d.parts();
        if a < -COEFF_MAX || b < -COEFF_MAX {
            return Err(DyadicError::CoefficientOverflow);
        }
        Dyadic::from_reduced_parts(a, b, c as i64)
    }

    #[inline]
    pub const fn to_bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn a(self) -> i64 {
        (self.0 as i64) >> A_SHIFT
    }

    #[inline]
    pub fn b(self) -> i64 {
        ((self.0 << (64 - A_SHIFT)) as i64) >> (64 - COEFF_BITS)
    }

    #[inline]
    pub fn exp(self) -> u32 {
        (self.0 & C_MASK) as u32
    }

    #[inline]
    pub fn parts(self) -> (i64, i64, u32) {
        (self.a(), self.b(), self.exp())
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// `(c, a, b)`, compared lexicographically. This is the fixed total order
    /// used by canonicalization; it has nothing to do with the real order.
    #[inline]
    pub fn order_key(self) -> (u32, i64, i64) {
        (self.exp(), self.a(), self.b())
    }

    /// The same order as [`Dyadic::order_key`], folded into one integer.
    #[inline]
    pub fn sort_key(self) -> u64 {
        let a = (self.a() + KEY_BIAS) as u64;
        let b = (self.b() + KEY_BIAS) as u64;
        ((self.exp() as u64) << (2 * COEFF_BITS)) | (a << COEFF_BITS) | b
    }

    /// Galois conjugate, `√2 ↦ -√2`. The denominator `√2^c` changes sign
    /// with it, so odd exponents negate the whole value.
    #[inline]
    pub fn twist(self) -> Dyadic {
        let (a, b, c) = self.parts();
        if c & 1 == 1 {
            Dyadic(raw_pack(-a, b, c as u64))
        } else {
            Dyadic(raw_pack(a, -b, c as u64))
        }
    }

    pub fn checked_add(self, rhs: Dyadic) -> Result<Dyadic, DyadicError> {
        self.add_traced(rhs).map(|(d, _)| d)
    }

    pub fn checked_sub(self, rhs: Dyadic) -> Result<Dyadic, DyadicError> {
        self.checked_add(-rhs)
    }

    /// Addition that also reports the aligned integer coefficient and the
    /// number of reduction steps.
    pub fn add_traced(self, rhs: Dyadic) -> Result<(Dyadic, AddTrace), DyadicError> {
        if self.is_zero() {
            return Ok((rhs, AddTrace { aligned_a: rhs.a(), reduce_steps: 0 }));
        }
        if rhs.is_zero() {
            return Ok((self, AddTrace { aligned_a: self.a(), reduce_steps: 0 }));
        }
        let (hi, lo) = if self.exp() >= rhs.exp() { (self, rhs) } else { (rhs, self) };
        let (ha, hb, c) = hi.parts();
        let (la, lb) = align(lo, c - lo.exp())?;
        let a = ha as i128 + la;
        let b = hb as i128 + lb;
        let (d, steps) = reduce_wide(a, b, c as i64)?;
        Ok((d, AddTrace { aligned_a: a as i64, reduce_steps: steps }))
    }

    pub fn checked_mul(self, rhs: Dyadic) -> Result<Dyadic, DyadicError> {
        if self.is_zero() || rhs.is_zero() {
            return Ok(Dyadic::ZERO);
        }
        let (a, b, c) = self.parts();
        let (x, y, z) = rhs.parts();
        let (a, b, x, y) = (a as i128, b as i128, x as i128, y as i128);
        reduce_wide(a * x + 2 * b * y, a * y + b * x, c as i64 + z as i64).map(|(d, _)| d)
    }

    /// `x / √2`
    pub fn div_sqrt2(self) -> Result<Dyadic, DyadicError> {
        if self.is_zero() {
            return Ok(self);
        }
        let (a, b, c) = self.parts();
        if a & 1 == 1 {
            if c >= EXP_MAX {
                return Err(DyadicError::ExponentOverflow);
            }
            return Ok(Dyadic(self.0 + 1));
        }
        reduce_wide(a as i128, b as i128, c as i64 + 1).map(|(d, _)| d)
    }

    /// `(x + y) / √2`, the row operation of every T-step.
    #[inline]
    pub fn sum_div_sqrt2(self, rhs: Dyadic) -> Result<Dyadic, DyadicError> {
        self.checked_add(rhs)?.div_sqrt2()
    }

    /// `(x - y) / √2`
    #[inline]
    pub fn diff_div_sqrt2(self, rhs: Dyadic) -> Result<Dyadic, DyadicError> {
        self.checked_add(-rhs)?.div_sqrt2()
    }

    /// Returns `true` when both `|x| <= 1` and `|x•| <= 1`.
    pub fn is_bounded_by_one(self) -> bool {
        let (a, b, c) = self.parts();
        let (a, b) = (a as i128, b as i128);
        let lim = 1i128 << c;
        // (a ± b√2)^2 = a^2 + 2b^2 ± 2ab√2 <= 2^c
        let x = a * a + 2 * b * b - lim;
        let y = 2 * a * b;
        sign_le_zero(x, y) && sign_le_zero(x, -y)
    }

    /// Floating-point approximation, for diagnostics only.
    pub fn approx(self) -> f64 {
        let (a, b, c) = self.parts();
        (a as f64 + b as f64 * std::f64::consts::SQRT_2) / std::f64::consts::SQRT_2.powi(c as i32)
    }
}

/// `x + y√2 <= 0` for integers x, y.
fn sign_le_zero(x: i128, y: i128) -> bool {
    match (x <= 0, y <= 0) {
        (true, true) => true,
        (false, false) => false,
        // x <= 0 < y: need |x| >= y√2, i.e. x^2 >= 2y^2
        (true, false) => x * x >= 2 * y * y,
        // y <= 0 < x: need |y|√2 >= x
        (false, true) => 2 * y * y >= x * x,
    }
}

/// Numerator of `x·√2^gap` as wide integers.
fn align(x: Dyadic, gap: u32) -> Result<(i128, i128), DyadicError> {
    let (mut a, mut b) = (x.a() as i128, x.b() as i128);
    if gap % 2 == 1 {
        (a, b) = (2 * b, a);
    }
    let m = gap / 2;
    if m >= 96 {
        return Err(DyadicError::CoefficientOverflow);
    }
    Ok((a << m, b << m))
}

/// Divides out √2 while the encoding allows it; returns the step count.
pub(crate) fn reduce_wide(mut a: i128, mut b: i128, mut c: i64) -> Result<(Dyadic, u32), DyadicError> {
    if c < 0 {
        return Err(DyadicError::NegativeExponent(c));
    }
    if a == 0 && b == 0 {
        return Ok((Dyadic::ZERO, 0));
    }
    let mut steps = 0;
    while c > 0 && a & 1 == 0 {
        (a, b) = (b, a / 2);
        c -= 1;
        steps += 1;
    }
    let a = i64::try_from(a).map_err(|_| DyadicError::CoefficientOverflow)?;
    let b = i64::try_from(b).map_err(|_| DyadicError::CoefficientOverflow)?;
    Ok((pack(a, b, c)?, steps))
}

/// Reduced encoding of `(a + b√2)/√2^c`.
pub fn reduce(a: i64, b: i64, c: i64) -> Result<Dyadic, DyadicError> {
    Dyadic::new(a, b, c)
}

fn pack(a: i64, b: i64, c: i64) -> Result<Dyadic, DyadicError> {
    if a.abs() > COEFF_MAX || b.abs() > COEFF_MAX {
        return Err(DyadicError::CoefficientOverflow);
    }
    if c > EXP_MAX as i64 {
        return Err(DyadicError::ExponentOverflow);
    }
    Ok(Dyadic(raw_pack(a, b, c as u64)))
}

#[inline]
fn raw_pack(a: i64, b: i64, c: u64) -> u64 {
    ((a as u64 & COEFF_MASK) << A_SHIFT) | ((b as u64 & COEFF_MASK) << B_SHIFT) | c
}

impl Neg for Dyadic {
    type Output = Dyadic;

    #[inline]
    fn neg(self) -> Dyadic {
        if self.is_zero() {
            return self;
        }
        let (a, b, c) = self.parts();
        Dyadic(raw_pack(-a, -b, c as u64))
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        self.checked_add(rhs).expect("Z[1/√2] addition overflow")
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;

    fn sub(self, rhs: Dyadic) -> Dyadic {
        self.checked_sub(rhs).expect("Z[1/√2] subtraction overflow")
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;

    fn mul(self, rhs: Dyadic) -> Dyadic {
        self.checked_mul(rhs).expect("Z[1/√2] multiplication overflow")
    }
}

impl Ord for Dyadic {
    #[inline]
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Dyadic {
    #[inline]
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i8> for Dyadic {
    fn from(v: i8) -> Dyadic {
        Dyadic::new(v as i64, 0, 0).expect("small integers always fit")
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c) = self.parts();
        write!(f, "{a},{b},{c}")
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, c) = self.parts();
        write!(f, "({a}{b:+}√2)/√2^{c}")
    }
}

impl FromStr for Dyadic {
    type Err = DyadicError;

    /// Parses the `a,b,c` text form. The triple must already be reduced.
    fn from_str(s: &str) -> Result<Dyadic, DyadicError> {
        let bad = || DyadicError::Syntax(s.to_string());
        let mut it = s.trim().split(',');
        let mut next = || -> Result<i64, DyadicError> {
            it.next().ok_or_else(bad)?.trim().parse::<i64>().map_err(|_| bad())
        };
        let (a, b, c) = (next()?, next()?, next()?);
        if it.next().is_some() {
            return Err(bad());
        }
        Dyadic::from_reduced_parts(a, b, c)
    }
}
