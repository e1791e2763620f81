//! Binary floating-point reals with a big-integer mantissa.
//!
//! A value is `mantissa * 2^exponent` where the mantissa is truncated to at
//! most `precision` bits after every operation. Transcendental functions are
//! evaluated in fixed point with guard bits and then rounded back.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 128;
pub const MIN_PRECISION: u32 = 64;

const GUARD_BITS: u64 = 64;

#[derive(Clone, Debug)]
pub struct HighPrecisionReal {
    mantissa: BigInt,
    exponent: i64,
    precision: u32,
}

impl HighPrecisionReal {
    pub fn zero(precision: u32) -> Self {
        Self {
            mantissa: BigInt::zero(),
            exponent: 0,
            precision: precision.max(MIN_PRECISION),
        }
    }

    fn normalized(mut mantissa: BigInt, mut exponent: i64, precision: u32) -> Self {
        let precision = precision.max(MIN_PRECISION);
        if mantissa.is_zero() {
            return Self::zero(precision);
        }
        let bits = mantissa.bits();
        if bits > u64::from(precision) {
            let shift = bits - u64::from(precision);
            let negative = mantissa.is_negative();
            // truncate toward zero
            mantissa = mantissa.abs() >> shift;
            if negative {
                mantissa = -mantissa;
            }
            exponent += shift as i64;
        }
        Self {
            mantissa,
            exponent,
            precision,
        }
    }

    pub fn from_bigint(n: &BigInt, precision: u32) -> Self {
        Self::normalized(n.clone(), 0, precision)
    }

    pub fn from_i64(n: i64, precision: u32) -> Self {
        Self::normalized(BigInt::from(n), 0, precision)
    }

    /// Exact conversion of a finite `f64`.
    pub fn from_f64(x: f64, precision: u32) -> Self {
        assert!(x.is_finite(), "non-finite f64");
        if x == 0.0 {
            return Self::zero(precision);
        }
        let bits = x.to_bits();
        let raw_exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, e) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), raw_exp - 1075)
        };
        let m = if x < 0.0 {
            -BigInt::from(m)
        } else {
            BigInt::from(m)
        };
        Self::normalized(m, e, precision)
    }

    pub fn from_rational(q: &BigRational, precision: u32) -> Self {
        let precision = precision.max(MIN_PRECISION);
        if q.is_zero() {
            return Self::zero(precision);
        }
        let num = q.numer().abs();
        let den = q.denom();
        let shift = i64::from(precision) + den.bits() as i64 - num.bits() as i64 + 1;
        let m = if shift >= 0 {
            (num << shift as u64) / den
        } else {
            num / (den << (-shift) as u64)
        };
        let m = if q.is_negative() { -m } else { m };
        Self::normalized(m, -shift, precision)
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        Self::normalized(self.mantissa.clone(), self.exponent, precision)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa.is_positive()
    }

    pub fn abs(&self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            ..self.clone()
        }
    }

    /// `floor(log2 |x|) + 1`, the position just above the leading bit.
    fn top(&self) -> i64 {
        self.mantissa.bits() as i64 + self.exponent
    }

    /// The exact value as a rational number.
    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << self.exponent as u64)
        } else {
            BigRational::new(
                self.mantissa.clone(),
                BigInt::one() << (-self.exponent) as u64,
            )
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.mantissa.bits();
        let (m, e) = if bits > 64 {
            let shift = bits - 64;
            let negative = self.mantissa.is_negative();
            let m = self.mantissa.abs() >> shift;
            (if negative { -m } else { m }, self.exponent + shift as i64)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        ldexp(m.to_f64().expect("64-bit mantissa fits f64"), e)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::from_i64(1, self.precision);
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        acc
    }

    /// Natural logarithm; domain error for non-positive input.
    pub fn ln(&self) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::Domain(format!(
                "logarithm of non-positive value {}",
                self.to_f64()
            )));
        }
        Ok(ln_scaled(
            &self.mantissa,
            &BigInt::one(),
            self.exponent,
            self.precision,
        ))
    }

    /// `e^x`. Arguments beyond `|x| < 2^40` are rejected.
    pub fn exp(&self) -> Result<Self> {
        let p = self.precision;
        if self.is_zero() {
            return Ok(Self::from_i64(1, p));
        }
        if self.top() > 40 {
            return Err(Error::Domain(format!(
                "exp argument {} out of range",
                self.to_f64()
            )));
        }
        let wp = u64::from(p) + GUARD_BITS;
        let x = to_fixed(self, wp);
        let ln2 = ln2_fixed(wp);
        // x = k ln2 + r with |r| <= ln2 / 2
        let half = &ln2 >> 1u32;
        let k = (&x + if x.is_negative() { -&half } else { half }) / &ln2;
        let r = &x - &k * &ln2;
        let one = BigInt::one() << wp;
        let mut term = one.clone();
        let mut sum = one;
        let mut i = 1u64;
        loop {
            term = shr_trunc(&term * &r, wp) / i;
            if term.is_zero() {
                break;
            }
            sum += &term;
            i += 1;
        }
        let k = k.to_i64().expect("bounded by argument check");
        Ok(Self::normalized(sum, k - wp as i64, p))
    }

    /// `pi` to the given precision (Machin's formula).
    pub fn pi(precision: u32) -> Self {
        let wp = u64::from(precision.max(MIN_PRECISION)) + GUARD_BITS;
        let pi = (arctan_inv_fixed(5, wp) * 4u32 - arctan_inv_fixed(239, wp)) * 4u32;
        Self::normalized(pi, -(wp as i64), precision)
    }

    pub fn ln2(precision: u32) -> Self {
        let wp = u64::from(precision.max(MIN_PRECISION)) + GUARD_BITS;
        Self::normalized(ln2_fixed(wp), -(wp as i64), precision)
    }

    fn cmp_value(&self, other: &Self) -> Ordering {
        let (sa, sb) = (self.mantissa.sign(), other.mantissa.sign());
        if sa != sb {
            let rank = |s: Sign| match s {
                Sign::Minus => 0,
                Sign::NoSign => 1,
                Sign::Plus => 2,
            };
            return rank(sa).cmp(&rank(sb));
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        let magnitude = if self.top() != other.top() {
            self.top().cmp(&other.top())
        } else {
            let e = self.exponent.min(other.exponent);
            let a = self.mantissa.abs() << (self.exponent - e) as u64;
            let b = other.mantissa.abs() << (other.exponent - e) as u64;
            a.cmp(&b)
        };
        if sa == Sign::Minus {
            magnitude.reverse()
        } else {
            magnitude
        }
    }
}

/// Natural logarithm of a positive rational at `precision` bits.
pub fn log_rational(q: &BigRational, precision: u32) -> Result<HighPrecisionReal> {
    if !q.is_positive() {
        return Err(Error::Domain(format!(
            "logarithm of non-positive rational {q}"
        )));
    }
    Ok(ln_scaled(q.numer(), q.denom(), 0, precision))
}

/// `ln(num / den * 2^pow2)` for positive integers `num`, `den`.
///
/// Writes the argument as `2^k * r` with `r` in `(1/2, 2)`, then
/// `ln r = 2 atanh((r - 1) / (r + 1))`. The working precision grows until the
/// result carries the requested number of significant bits.
fn ln_scaled(num: &BigInt, den: &BigInt, pow2: i64, precision: u32) -> HighPrecisionReal {
    let precision = precision.max(MIN_PRECISION);
    let (bn, bd) = (num.bits(), den.bits());
    let k = bn as i64 - bd as i64 + pow2;
    let p = num << bd;
    let q = den << bn;
    let diff = &p - &q;
    let sum = &p + &q;
    if diff.is_zero() && k == 0 {
        return HighPrecisionReal::zero(precision);
    }
    let want = u64::from(precision) + 16;
    let mut wp = u64::from(precision) + GUARD_BITS + (64 - k.unsigned_abs().leading_zeros() as u64);
    loop {
        let z = (&diff << wp) / &sum;
        let ln_r = atanh_fixed(&z, wp) << 1u32;
        let total = BigInt::from(k) * ln2_fixed(wp) + ln_r;
        if total.bits() >= want || wp > want + sum.bits() + 64 {
            return HighPrecisionReal::normalized(total, -(wp as i64), precision);
        }
        wp += want - total.bits() + 32;
    }
}

/// `atanh(z)` for fixed-point `z` (scale `2^wp`), `|z| <= 1/3`.
fn atanh_fixed(z: &BigInt, wp: u64) -> BigInt {
    let z2 = shr_trunc(z * z, wp);
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut k = 1u64;
    loop {
        power = shr_trunc(&power * &z2, wp);
        if power.is_zero() {
            break;
        }
        sum += &power / (2 * k + 1);
        k += 1;
    }
    sum
}

fn ln2_fixed(wp: u64) -> BigInt {
    let third = (BigInt::one() << wp) / 3u32;
    atanh_fixed(&third, wp) << 1u32
}

/// `atan(1/x)` in fixed point.
fn arctan_inv_fixed(x: u32, wp: u64) -> BigInt {
    let x2 = BigInt::from(x) * x;
    let mut power = (BigInt::one() << wp) / x;
    let mut sum = power.clone();
    let mut k = 1u64;
    loop {
        power /= &x2;
        if power.is_zero() {
            break;
        }
        let term = &power / (2 * k + 1);
        if k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
        k += 1;
    }
    sum
}

fn to_fixed(x: &HighPrecisionReal, wp: u64) -> BigInt {
    let shift = x.exponent + wp as i64;
    if shift >= 0 {
        &x.mantissa << shift as u64
    } else {
        &x.mantissa >> (-shift) as u64
    }
}

/// Right shift rounding toward zero, so iterated products of negative terms
/// reach zero instead of sticking at -1.
fn shr_trunc(x: BigInt, shift: u64) -> BigInt {
    if x.is_negative() {
        -((-x) >> shift)
    } else {
        x >> shift
    }
}

fn ldexp(mut f: f64, mut e: i64) -> f64 {
    while e > 1000 {
        f *= 2f64.powi(1000);
        e -= 1000;
        if f.is_infinite() {
            return f;
        }
    }
    while e < -1000 {
        f *= 2f64.powi(-1000);
        e += 1000;
        if f == 0.0 {
            return f;
        }
    }
    f * 2f64.powi(e as i32)
}

impl PartialEq for HighPrecisionReal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl PartialOrd for HighPrecisionReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl fmt::Display for HighPrecisionReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::format_significant(self.to_f64(), 9))
    }
}

impl<'a> Add<&'a HighPrecisionReal> for &'a HighPrecisionReal {
    type Output = HighPrecisionReal;

    fn add(self, rhs: &HighPrecisionReal) -> HighPrecisionReal {
        let p = self.precision.max(rhs.precision);
        if rhs.is_zero() {
            return self.with_precision(p);
        }
        if self.is_zero() {
            return rhs.with_precision(p);
        }
        let (hi, lo) = if self.exponent >= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        if lo.top() < hi.top() - i64::from(p) - 4 {
            return hi.with_precision(p);
        }
        let m = (&hi.mantissa << (hi.exponent - lo.exponent) as u64) + &lo.mantissa;
        HighPrecisionReal::normalized(m, lo.exponent, p)
    }
}

impl<'a> Sub<&'a HighPrecisionReal> for &'a HighPrecisionReal {
    type Output = HighPrecisionReal;

    fn sub(self, rhs: &HighPrecisionReal) -> HighPrecisionReal {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a HighPrecisionReal> for &'a HighPrecisionReal {
    type Output = HighPrecisionReal;

    fn mul(self, rhs: &HighPrecisionReal) -> HighPrecisionReal {
        HighPrecisionReal::normalized(
            &self.mantissa * &rhs.mantissa,
            self.exponent + rhs.exponent,
            self.precision.max(rhs.precision),
        )
    }
}

impl<'a> Div<&'a HighPrecisionReal> for &'a HighPrecisionReal {
    type Output = HighPrecisionReal;

    /// Panics on division by zero, like the integer types.
    fn div(self, rhs: &HighPrecisionReal) -> HighPrecisionReal {
        assert!(!rhs.is_zero(), "division by zero");
        let p = self.precision.max(rhs.precision);
        let shift =
            (i64::from(p) + rhs.mantissa.bits() as i64 - self.mantissa.bits() as i64 + 1).max(0);
        HighPrecisionReal::normalized(
            (&self.mantissa << shift as u64) / &rhs.mantissa,
            self.exponent - rhs.exponent - shift,
            p,
        )
    }
}

impl Neg for &HighPrecisionReal {
    type Output = HighPrecisionReal;

    fn neg(self) -> HighPrecisionReal {
        HighPrecisionReal {
            mantissa: -&self.mantissa,
            ..self.clone()
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for HighPrecisionReal {
            type Output = HighPrecisionReal;
            fn $m(self, rhs: HighPrecisionReal) -> HighPrecisionReal {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a HighPrecisionReal> for HighPrecisionReal {
            type Output = HighPrecisionReal;
            fn $m(self, rhs: &HighPrecisionReal) -> HighPrecisionReal {
                (&self).$m(rhs)
            }
        }
    )*};
}

forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for HighPrecisionReal {
    type Output = HighPrecisionReal;

    fn neg(self) -> HighPrecisionReal {
        -&self
    }
}
