//! Exact integer and rational arithmetic plus the classical sequences used
//! throughout the crate.
//!
//! Integers and rationals are `num-bigint` / `num-rational` values; `Ratio`
//! reduces to lowest terms with a positive denominator after every operation,
//! which is the canonical form every cache and output file relies on.

mod real;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use real::{log_rational, HighPrecisionReal, DEFAULT_PRECISION, MIN_PRECISION};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// `n!` as an exact integer.
pub fn factorial(n: u64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        // The running product is C(n, i+1) after each step, so the division is exact.
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// Row `n` of Pascal's triangle, `C(n, 0) ..= C(n, n)`.
pub fn binomial_row(n: u64) -> Vec<BigInt> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut cur = BigInt::one();
    row.push(cur.clone());
    for i in 0..n {
        cur = cur * (n - i) / (i + 1);
        row.push(cur.clone());
    }
    row
}

/// The `n`-th Catalan number `C(2n, n) / (n + 1)`.
pub fn catalan(n: u64) -> BigInt {
    let (q, r) = binomial(2 * n, n).div_rem(&BigInt::from(n + 1));
    debug_assert!(r.is_zero());
    q
}

/// Bernoulli numbers `B_0 ..= B_m` for the generating function
/// `t / (e^t - 1)`, so `B_1 = -1/2`.
pub fn bernoulli_numbers(m: usize) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = Vec::with_capacity(m + 1);
    out.push(BigRational::one());
    for j in 1..=m {
        // sum_{k <= j} C(j+1, k) B_k = 0
        let row = binomial_row(j as u64 + 1);
        let mut acc = BigRational::zero();
        for (k, b) in out.iter().enumerate() {
            if !b.is_zero() {
                acc += b * BigRational::from_integer(row[k].clone());
            }
        }
        out.push(-acc / BigRational::from_integer(row[j].clone()));
    }
    out
}

/// A single Bernoulli number `B_m` (with `B_1 = -1/2`).
pub fn bernoulli(m: usize) -> BigRational {
    if m > 1 && m % 2 == 1 {
        return BigRational::zero();
    }
    bernoulli_numbers(m).pop().expect("non-empty")
}

/// `p/q`, or `p` when the denominator is one.
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses the `p/q` / `p` form. Only canonical input is accepted: positive
/// denominator other than one, and numerator and denominator coprime.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = |why: &str| Error::Parse(format!("{why}: {s:?}"));
    let int = |t: &str| -> Result<BigInt> {
        let digits = t.strip_prefix('-').unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad("not an integer"));
        }
        if digits.len() > 1 && digits.starts_with('0') {
            return Err(bad("leading zero"));
        }
        if t.starts_with('-') && digits == "0" {
            return Err(bad("negative zero"));
        }
        t.parse::<BigInt>().map_err(|_| bad("not an integer"))
    };
    match s.split_once('/') {
        None => Ok(BigRational::from_integer(int(s)?)),
        Some((p, q)) => {
            if q.starts_with('-') {
                return Err(bad("denominator must be positive"));
            }
            let (p, q) = (int(p)?, int(q)?);
            if q.is_zero() {
                return Err(bad("zero denominator"));
            }
            if q.is_one() {
                return Err(bad("denominator 1 must be omitted"));
            }
            if !p.gcd(&q).is_one() {
                return Err(bad("not in lowest terms"));
            }
            Ok(BigRational::new_raw(p, q))
        }
    }
}

/// True when `q` is in lowest terms with a positive denominator.
pub fn is_canonical(q: &BigRational) -> bool {
    q.denom().is_positive() && q.numer().gcd(q.denom()).is_one()
}

/// Formats `x` with `digits` significant digits, switching to scientific
/// notation for very small or very large magnitudes.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        format!("{:.*}", (digits as i32 - 1 - exp) as usize, x)
    } else {
        sci
    }
}
