//! The two-parameter table `H(x, y)` and the counts `h(n) = H(0, n)`,
//! `g(n) = (2n+1)! h(n)`.
//!
//! Entries are filled by increasing weight `w = x + 2y`. For `y = 0` the value
//! is `2^-x`; otherwise
//!
//! ```text
//! (w+1) H(x,y) = (x+1) H(x+1,y-1) + (x+1)/2 H(x-1,y)
//!              + (x+1)/2 * sum_{0<=a<=x, 0<=b<=y-1} H(a,b) H(x-a,y-1-b)
//! ```
//!
//! with `H = 0` at negative indices (at `x = 0` this is the boundary
//! recurrence). Every right-hand entry has weight below `w`.
//!
//! Two fill routes produce identical tables. The reference route works on
//! rationals directly. The fast route stores `S(x,y) = (w+1)! 2^x H(x,y)`,
//! which turns the recurrence into integer arithmetic with a single exact
//! halving per entry; if that halving ever leaves a remainder the build falls
//! back to the rational route.

mod cache;

pub use cache::{
    build_htable_cached, read_cache, read_cache_from, write_cache, write_cache_to, CachedBuild,
    CACHE_MAGIC,
};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exactmath::{binomial_row, factorial};

/// `H(x, y)` for every `x + 2y <= weight_bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HTable {
    weight_bound: usize,
    // rows[y][x]
    rows: Vec<Vec<BigRational>>,
}

impl HTable {
    pub fn weight_bound(&self) -> usize {
        self.weight_bound
    }

    /// Largest `n` with `h(n)` available.
    pub fn max_n(&self) -> usize {
        self.weight_bound / 2
    }

    pub fn get(&self, x: usize, y: usize) -> Option<&BigRational> {
        self.rows.get(y).and_then(|row| row.get(x))
    }

    /// Entries ordered by weight, then by `x`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &BigRational)> + '_ {
        (0..=self.weight_bound).flat_map(move |w| {
            (0..=w / 2)
                .rev()
                .map(move |y| (w - 2 * y, y, &self.rows[y][w - 2 * y]))
        })
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `h(n) = H(0, n)`.
    pub fn h(&self, n: usize) -> Result<&BigRational> {
        self.get(0, n).ok_or(Error::Range {
            what: "n",
            index: n,
            max: self.max_n(),
        })
    }

    /// `g(n) = (2n+1)! h(n)`, which must be an integer.
    pub fn g(&self, n: usize) -> Result<BigInt> {
        let product = self.h(n)? * BigRational::from_integer(factorial(2 * n as u64 + 1));
        if !product.denom().is_one() {
            return Err(Error::Consistency(format!(
                "(2n+1)! h(n) = {product} is not an integer at n = {n}"
            )));
        }
        Ok(product.to_integer())
    }

    /// The sub-table for a smaller weight bound.
    pub fn restrict(&self, weight_bound: usize) -> HTable {
        if weight_bound >= self.weight_bound {
            return self.clone();
        }
        let rows = self.rows[..=weight_bound / 2]
            .iter()
            .enumerate()
            .map(|(y, row)| row[..=weight_bound - 2 * y].to_vec())
            .collect();
        HTable { weight_bound, rows }
    }

    /// This table grown to `weight_bound`, reusing every existing entry.
    pub fn extend(&self, weight_bound: usize) -> HTable {
        if weight_bound <= self.weight_bound {
            return self.restrict(weight_bound);
        }
        if let Some(mut scaled) = ScaledRows::from_table(self) {
            if scaled.fill(self.weight_bound + 1, weight_bound).is_ok() {
                return scaled.into_table(weight_bound);
            }
        }
        let mut rows = self.rows.clone();
        fill_rational(&mut rows, self.weight_bound + 1, weight_bound);
        HTable { weight_bound, rows }
    }

    pub(crate) fn from_rows(weight_bound: usize, rows: Vec<Vec<BigRational>>) -> HTable {
        debug_assert_eq!(rows.len(), weight_bound / 2 + 1);
        HTable { weight_bound, rows }
    }
}

/// Builds the table through weight `weight_bound`.
pub fn build_htable(weight_bound: usize) -> HTable {
    let mut scaled = ScaledRows::default();
    match scaled.fill(0, weight_bound) {
        Ok(()) => scaled.into_table(weight_bound),
        Err(_) => build_htable_rational(weight_bound),
    }
}

/// Reference build directly over rationals, literal full double sum.
pub fn build_htable_rational(weight_bound: usize) -> HTable {
    let mut rows = Vec::new();
    fill_rational(&mut rows, 0, weight_bound);
    HTable { weight_bound, rows }
}

/// Fast-route build that reports the first entry whose scaled value failed
/// to be an integer instead of falling back.
pub fn build_htable_scaled(weight_bound: usize) -> Result<HTable> {
    let mut scaled = ScaledRows::default();
    scaled
        .fill(0, weight_bound)
        .map_err(|(x, y)| Error::Consistency(format!("scaled entry ({x}, {y}) is not integral")))?;
    Ok(scaled.into_table(weight_bound))
}

/// `h(n)` from a table.
pub fn h(table: &HTable, n: usize) -> Result<&BigRational> {
    table.h(n)
}

/// `g(n)` from a table.
pub fn g(table: &HTable, n: usize) -> Result<BigInt> {
    table.g(n)
}

fn fill_rational(rows: &mut Vec<Vec<BigRational>>, from: usize, to: usize) {
    let zero = BigRational::zero();
    for w in from..=to {
        if w % 2 == 0 {
            rows.push(Vec::new());
        }
        let level: Vec<(usize, BigRational)> = (0..=w / 2)
            .into_par_iter()
            .map(|y| {
                let x = w - 2 * y;
                let at = |a: isize, b: isize| -> &BigRational {
                    if a < 0 || b < 0 {
                        &zero
                    } else {
                        &rows[b as usize][a as usize]
                    }
                };
                let value = if y == 0 {
                    BigRational::new(BigInt::one(), BigInt::one() << x)
                } else {
                    let (xi, yi) = (x as isize, y as isize);
                    let mut conv = BigRational::zero();
                    for a in 0..=xi {
                        for b in 0..yi {
                            conv += at(a, b) * at(xi - a, yi - 1 - b);
                        }
                    }
                    let x1 = BigRational::from_integer(BigInt::from(x + 1));
                    let half_x1 = BigRational::new(BigInt::from(x + 1), BigInt::from(2));
                    let rhs =
                        &x1 * at(xi + 1, yi - 1) + &half_x1 * at(xi - 1, yi) + &half_x1 * conv;
                    rhs / BigRational::from_integer(BigInt::from(w + 1))
                };
                (y, value)
            })
            .collect();
        for (y, value) in level {
            rows[y].push(value);
        }
    }
}

/// `S(x, y) = (w+1)! 2^x H(x, y)` stored as integers, rows[y][x].
#[derive(Default)]
struct ScaledRows {
    rows: Vec<Vec<BigInt>>,
}

impl ScaledRows {
    fn from_table(table: &HTable) -> Option<Self> {
        let facts = factorials(table.weight_bound + 1);
        let mut rows = Vec::with_capacity(table.rows.len());
        for (y, row) in table.rows.iter().enumerate() {
            let mut out = Vec::with_capacity(row.len());
            for (x, v) in row.iter().enumerate() {
                let scale = &facts[x + 2 * y + 1] << x;
                let (q, r) = (v.numer() * scale).div_rem(v.denom());
                if !r.is_zero() {
                    return None;
                }
                out.push(q);
            }
            rows.push(out);
        }
        Some(Self { rows })
    }

    /// Fills weights `from..=to`; on failure returns the offending `(x, y)`.
    fn fill(&mut self, from: usize, to: usize) -> std::result::Result<(), (usize, usize)> {
        for w in from..=to {
            if w % 2 == 0 {
                self.rows.push(Vec::new());
            }
            let binom = binomial_row(w as u64);
            let rows = &self.rows;
            let level: Vec<std::result::Result<BigInt, (usize, usize)>> = (0..=w / 2)
                .into_par_iter()
                .map(|y| scaled_entry(rows, w - 2 * y, y, &binom).ok_or((w - 2 * y, y)))
                .collect();
            for (y, value) in level.into_iter().enumerate() {
                self.rows[y].push(value?);
            }
        }
        Ok(())
    }

    fn into_table(self, weight_bound: usize) -> HTable {
        let facts = factorials(weight_bound + 1);
        let rows = self
            .rows
            .into_par_iter()
            .enumerate()
            .map(|(y, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(x, s)| BigRational::new(s, &facts[x + 2 * y + 1] << x))
                    .collect()
            })
            .collect();
        HTable { weight_bound, rows }
    }
}

/// One scaled entry at weight `w = x + 2y`, given all lower weights.
///
/// With `w1 = a + 2b` the convolution term becomes
/// `C(w, w1+1) S(a,b) S(x-a,y-1-b)`, and
/// `S(x,y) = (x+1)/2 * [S(x+1,y-1) + 2 S(x-1,y) + sum]`.
/// Products are grouped by `w1` so each binomial multiplies once, and the
/// reflection `(a,b) -> (x-a, y-1-b)` halves the number of products.
fn scaled_entry(rows: &[Vec<BigInt>], x: usize, y: usize, binom: &[BigInt]) -> Option<BigInt> {
    let w = x + 2 * y;
    if y == 0 {
        return Some(if x == 0 {
            BigInt::one()
        } else {
            &rows[0][x - 1] * (x + 1)
        });
    }
    // The rectangle 0..=x by 0..y-1, flattened as k = a*y + b; the reflected
    // partner of k is total-1-k.
    let total = (x + 1) * y;
    let mut grouped = vec![BigInt::zero(); w - 1];
    for k in 0..total / 2 {
        let (a, b) = (k / y, k % y);
        grouped[a + 2 * b] += &rows[b][a] * &rows[y - 1 - b][x - a];
    }
    let mut conv = BigInt::zero();
    for (w1, s) in grouped.iter().enumerate() {
        if !s.is_zero() {
            conv += s * &binom[w1 + 1];
        }
    }
    conv <<= 1;
    if total % 2 == 1 {
        let k = total / 2;
        let (a, b) = (k / y, k % y);
        let s = &rows[b][a];
        conv += s * s * &binom[a + 2 * b + 1];
    }
    let mut bracket = conv + &rows[y - 1][x + 1];
    if x > 0 {
        bracket += &rows[y][x - 1] << 1;
    }
    let numerator = bracket * (x + 1);
    let (q, r) = numerator.div_rem(&BigInt::from(2));
    r.is_zero().then_some(q)
}

fn factorials(n: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(BigInt::one());
    for k in 1..=n {
        let next = &out[k - 1] * k;
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactmath::is_canonical;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn weight_zero_is_single_entry() {
        let t = build_htable(0);
        assert_eq!(t.len(), 1);
        assert_eq!(t.get(0, 0), Some(&rat(1, 1)));
    }

    #[test]
    fn hand_filled_entries() {
        let t = build_htable(6);
        for x in 0..=6 {
            assert_eq!(
                t.get(x, 0).unwrap(),
                &BigRational::new(1.into(), BigInt::one() << x)
            );
        }
        assert_eq!(t.get(0, 1).unwrap(), &rat(1, 3));
        assert_eq!(t.get(1, 1).unwrap(), &rat(11, 24));
        assert_eq!(t.h(0).unwrap(), &rat(1, 1));
        assert_eq!(t.h(1).unwrap(), &rat(1, 3));
        assert_eq!(t.h(2).unwrap(), &rat(19, 120));
        assert_eq!(t.g(0).unwrap(), BigInt::from(1));
        assert_eq!(t.g(1).unwrap(), BigInt::from(2));
        assert_eq!(t.g(2).unwrap(), BigInt::from(19));
    }

    #[test]
    fn out_of_range_is_reported() {
        let t = build_htable(5);
        assert_eq!(t.max_n(), 2);
        assert!(matches!(
            t.h(3),
            Err(Error::Range {
                index: 3,
                max: 2,
                ..
            })
        ));
        assert!(t.g(3).is_err());
    }

    #[test]
    fn fast_and_reference_routes_agree() {
        for w in [0, 1, 2, 7, 16, 25] {
            assert_eq!(
                build_htable_scaled(w).unwrap(),
                build_htable_rational(w),
                "W = {w}"
            );
        }
    }

    #[test]
    fn entries_are_positive_canonical_and_integral() {
        let t = build_htable(40);
        for (_, _, v) in t.entries() {
            assert!(v > &BigRational::zero());
            assert!(is_canonical(v));
        }
        for n in 0..=t.max_n() {
            t.g(n).unwrap();
        }
        assert_eq!(t.entries().count(), t.len());
    }

    #[test]
    fn entry_order_is_weight_then_x() {
        let t = build_htable(5);
        let order: Vec<(usize, usize)> = t.entries().map(|(x, y, _)| (x, y)).collect();
        assert_eq!(
            order,
            vec![
                (0, 0),
                (1, 0),
                (0, 1),
                (2, 0),
                (1, 1),
                (3, 0),
                (0, 2),
                (2, 1),
                (4, 0),
                (1, 2),
                (3, 1),
                (5, 0)
            ]
        );
    }

    #[test]
    fn extension_matches_direct_build() {
        let small = build_htable(13);
        let grown = small.extend(30);
        let direct = build_htable(30);
        assert_eq!(grown, direct);
        assert_eq!(direct.restrict(13), small);
        assert_eq!(direct.extend(10), build_htable(10));
    }

    #[test]
    fn rebuild_is_deterministic() {
        assert_eq!(build_htable(30), build_htable(30));
    }

    #[test]
    fn known_counts() {
        let t = build_htable(12);
        let g: Vec<BigInt> = (0..=6).map(|n| t.g(n).unwrap()).collect();
        let expected: Vec<BigInt> = [1u64, 2, 19, 428, 17746, 1178792, 114892114]
            .into_iter()
            .map(BigInt::from)
            .collect();
        assert_eq!(g, expected);
    }
}
