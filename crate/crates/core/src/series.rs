//! Truncated formal power series with exact rational coefficients.
//!
//! [`Series1`] is dense in one variable; [`Series2`] is sparse in `(u, v)` and
//! truncated in the `v` exponent only. Truncation bounds travel with the
//! values: a product is known up to the smaller bound of its factors and a
//! `v`-derivative loses one degree, so every coefficient a series reports is
//! exact.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exactmath::{bernoulli_numbers, factorial, format_rational};
use crate::recurrence::HTable;

/// `c_0 + c_1 t + ... + c_N t^N`, known through order `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series1 {
    coeffs: Vec<BigRational>,
}

impl Series1 {
    pub fn new(coeffs: Vec<BigRational>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a series needs at least the constant term"
        );
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![BigRational::zero(); order + 1],
        }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Option<&BigRational> {
        self.coeffs.get(k)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs[..=order.min(self.order())].to_vec())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::new(
            (0..=n)
                .map(|k| &self.coeffs[k] + &other.coeffs[k])
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::new(
            (0..=n)
                .map(|k| &self.coeffs[k] - &other.coeffs[k])
                .collect(),
        )
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::new(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = vec![BigRational::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                if !b.is_zero() {
                    out[i + j] += a * b;
                }
            }
        }
        Self::new(out)
    }

    /// `d/dt`, known through order `N - 1` (an order-0 series maps to zero).
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(k.into()))
                .collect(),
        )
    }
}

impl fmt::Display for Series1 {
    /// One `k: p/q` line per non-zero coefficient.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                writeln!(f, "{k}: {}", format_rational(c))?;
            }
        }
        Ok(())
    }
}

/// Sparse `sum c_{a,b} u^a v^b`, known for every `v`-exponent `b <= bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series2 {
    bound: usize,
    coeffs: BTreeMap<(usize, usize), BigRational>,
}

impl Series2 {
    pub fn zero(bound: usize) -> Self {
        Self {
            bound,
            coeffs: BTreeMap::new(),
        }
    }

    /// `c u^a v^b` truncated at `bound`.
    pub fn monomial(a: usize, b: usize, c: BigRational, bound: usize) -> Self {
        let mut s = Self::zero(bound);
        s.add_term(a, b, c);
        s
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn coeff(&self, a: usize, b: usize) -> BigRational {
        self.coeffs
            .get(&(a, b))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Non-zero coefficients keyed by `(u-exponent, v-exponent)`.
    pub fn terms(&self) -> impl Iterator<Item = (&(usize, usize), &BigRational)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_term(&mut self, a: usize, b: usize, c: BigRational) {
        if b > self.bound || c.is_zero() {
            return;
        }
        let slot = self.coeffs.entry((a, b)).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.coeffs.remove(&(a, b));
        }
    }

    pub fn truncate(&self, bound: usize) -> Self {
        let bound = bound.min(self.bound);
        Self {
            bound,
            coeffs: self
                .coeffs
                .iter()
                .filter(|((_, b), _)| *b <= bound)
                .map(|(k, c)| (*k, c.clone()))
                .collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.truncate(self.bound.min(other.bound));
        for (&(a, b), c) in &other.coeffs {
            out.add_term(a, b, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.bound);
        for (&(a, b), x) in &self.coeffs {
            out.add_term(a, b, x * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let bound = self.bound.min(other.bound);
        let mut out = Self::zero(bound);
        for (&(a1, b1), c1) in &self.coeffs {
            if b1 > bound {
                continue;
            }
            for (&(a2, b2), c2) in &other.coeffs {
                if b1 + b2 <= bound {
                    out.add_term(a1 + a2, b1 + b2, c1 * c2);
                }
            }
        }
        out
    }

    /// `d/du`; the truncation bound is unchanged.
    pub fn d_du(&self) -> Self {
        let mut out = Self::zero(self.bound);
        for (&(a, b), c) in &self.coeffs {
            if a > 0 {
                out.add_term(a - 1, b, c * BigRational::from_integer(a.into()));
            }
        }
        out
    }

    /// `d/dv`, known through `v`-exponent `bound - 1`.
    pub fn d_dv(&self) -> Self {
        let mut out = Self::zero(self.bound.saturating_sub(1));
        for (&(a, b), c) in &self.coeffs {
            if b > 0 {
                out.add_term(a, b - 1, c * BigRational::from_integer(b.into()));
            }
        }
        out
    }
}

impl fmt::Display for Series2 {
    /// One `a b: p/q` line per non-zero coefficient of `u^a v^b`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((a, b), c) in &self.coeffs {
            writeln!(f, "{a} {b}: {}", format_rational(c))?;
        }
        Ok(())
    }
}

/// Taylor series of `tan x` through `x^{2K+1}` from the Bernoulli formula
/// `2^{2k} (2^{2k} - 1) |B_{2k}| / (2k)!` for the coefficient of `x^{2k-1}`.
pub fn tan_series_bernoulli(k_max: usize) -> Series1 {
    let order = 2 * k_max + 1;
    let bern = bernoulli_numbers(2 * k_max + 2);
    let mut coeffs = vec![BigRational::zero(); order + 1];
    for k in 1..=k_max + 1 {
        let pow = BigInt::one() << (2 * k);
        let num = BigRational::from_integer(&pow * (&pow - 1u32)) * bern[2 * k].abs();
        coeffs[2 * k - 1] = num / BigRational::from_integer(factorial(2 * k as u64));
    }
    Series1::new(coeffs)
}

/// The solution of `u' = 1 + u^2 / 2`, `u(0) = 0`, through `t^{2K+1}`,
/// solved coefficientwise: `u_0 = 1`, `(2k+1) u_k = 1/2 sum_{i+j=k-1} u_i u_j`
/// where `u_k` multiplies `t^{2k+1}`.
pub fn ode_lower_series(k_max: usize) -> Series1 {
    let mut odd: Vec<BigRational> = Vec::with_capacity(k_max + 1);
    odd.push(BigRational::one());
    for k in 1..=k_max {
        let conv: BigRational = (0..k).map(|i| &odd[i] * &odd[k - 1 - i]).sum();
        odd.push(conv / BigRational::from_integer(BigInt::from(2 * (2 * k + 1))));
    }
    spread_odd(&odd)
}

/// `sqrt(2) tan(t / sqrt(2))`: the coefficient of `t^{2k+1}` is `T_k / 2^k`.
pub fn scaled_tan_series(k_max: usize) -> Series1 {
    let tan = tan_series_bernoulli(k_max);
    let odd: Vec<BigRational> = (0..=k_max)
        .map(|k| tan.coeffs[2 * k + 1].clone() / BigRational::from_integer(BigInt::one() << k))
        .collect();
    spread_odd(&odd)
}

/// `xi(theta) = sum_{n <= N} h(n) theta^{2n+1}`.
pub fn xi_univariate(table: &HTable, n_max: usize) -> Result<Series1> {
    let odd = (0..=n_max)
        .map(|n| table.h(n).cloned())
        .collect::<Result<Vec<_>>>()?;
    Ok(spread_odd(&odd))
}

/// `xi(u, v) = sum H(x, y) u^x v^{x+2y+1}` over all monomials with
/// `v`-exponent at most `bound`.
pub fn xi_bivariate(table: &HTable, bound: usize) -> Result<Series2> {
    if bound > table.weight_bound() + 1 {
        return Err(Error::Range {
            what: "v-exponent bound",
            index: bound,
            max: table.weight_bound() + 1,
        });
    }
    let mut xi = Series2::zero(bound);
    for (x, y, value) in table.entries() {
        if x + 2 * y < bound {
            xi.add_term(x, x + 2 * y + 1, value.clone());
        }
    }
    Ok(xi)
}

/// `d_v xi - (1 + u xi + u^2/2) d_u xi - (xi^2 / 2 + u xi + 1)`, known
/// through `v`-exponent `bound - 1`.
///
/// Every monomial of `xi` has `v`-exponent at least one more than its
/// `u`-exponent, so a residual coefficient at `v`-exponent `b` only involves
/// coefficients of `xi` at `v`-exponent `<= b + 1`; the retained part is exact.
/// At `bound = 0` nothing is retained and the result is empty.
pub fn pde_residual(xi: &Series2) -> Series2 {
    let bound = xi.bound();
    if bound == 0 {
        return Series2::zero(0);
    }
    let one = Series2::monomial(0, 0, BigRational::one(), bound);
    let u = Series2::monomial(1, 0, BigRational::one(), bound);
    let half = BigRational::new(1.into(), 2.into());
    let u_xi = u.mul(xi);
    let transport = one
        .add(&u_xi)
        .add(&Series2::monomial(2, 0, half.clone(), bound));
    let source = xi.mul(xi).scale(&half).add(&u_xi).add(&one);
    xi.d_dv()
        .sub(&transport.mul(&xi.d_du()))
        .sub(&source)
        .truncate(bound.saturating_sub(1))
}

fn spread_odd(odd: &[BigRational]) -> Series1 {
    let mut coeffs = vec![BigRational::zero(); 2 * odd.len()];
    for (k, c) in odd.iter().enumerate() {
        coeffs[2 * k + 1] = c.clone();
    }
    Series1::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::build_htable;
    use proptest::prelude::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    #[test]
    fn one_plus_t_times_one_minus_t() {
        let a = Series1::from_integers(&[1, 1, 0]);
        let b = Series1::from_integers(&[1, -1, 0]);
        assert_eq!(a.mul(&b), Series1::from_integers(&[1, 0, -1]));
    }

    #[test]
    fn derivative_of_cubic() {
        let s = Series1::new(vec![rat(0, 1), rat(0, 1), rat(0, 1), rat(1, 3)]);
        assert_eq!(s.derivative(), Series1::from_integers(&[0, 0, 1]));
        assert_eq!(Series1::from_integers(&[5]).derivative(), Series1::zero(0));
    }

    #[test]
    fn mixed_orders_truncate_to_smaller() {
        let a = Series1::from_integers(&[1, 2, 3, 4]);
        let b = Series1::from_integers(&[1, 1]);
        assert_eq!(a.add(&b).order(), 1);
        assert_eq!(a.mul(&b), Series1::from_integers(&[1, 3]));
    }

    /// sin and cos from their factorial expansions, independent of Bernoulli.
    #[test]
    fn tan_times_cos_is_sin() {
        let order = 9;
        let term =
            |k: usize, sign: i64| rat(sign, 1) / BigRational::from_integer(factorial(k as u64));
        let sin = Series1::new(
            (0..=order)
                .map(|k| {
                    if k % 2 == 1 {
                        term(k, if k % 4 == 1 { 1 } else { -1 })
                    } else {
                        rat(0, 1)
                    }
                })
                .collect(),
        );
        let cos = Series1::new(
            (0..=order)
                .map(|k| {
                    if k % 2 == 0 {
                        term(k, if k % 4 == 0 { 1 } else { -1 })
                    } else {
                        rat(0, 1)
                    }
                })
                .collect(),
        );
        let tan = tan_series_bernoulli(4);
        assert_eq!(tan.order(), 9);
        assert_eq!(tan.mul(&cos), sin);
    }

    #[test]
    fn tan_coefficients() {
        let tan = tan_series_bernoulli(2);
        assert_eq!(tan.coeff(1), Some(&rat(1, 1)));
        assert_eq!(tan.coeff(3), Some(&rat(1, 3)));
        assert_eq!(tan.coeff(5), Some(&rat(2, 15)));
        assert_eq!(tan.coeff(4), Some(&rat(0, 1)));
    }

    #[test]
    fn ode_and_scaled_tan_coefficients() {
        let ode = ode_lower_series(2);
        let scaled = scaled_tan_series(2);
        for s in [&ode, &scaled] {
            assert_eq!(s.coeff(1), Some(&rat(1, 1)));
            assert_eq!(s.coeff(3), Some(&rat(1, 6)));
            assert_eq!(s.coeff(5), Some(&rat(1, 30)));
            assert_eq!(s.coeff(0), Some(&rat(0, 1)));
        }
    }

    #[test]
    fn ode_series_solves_the_ode() {
        let u = ode_lower_series(10);
        let du = u.derivative();
        let mut one = vec![rat(0, 1); du.order() + 1];
        one[0] = rat(1, 1);
        let rhs = u.mul(&u).scale(&rat(1, 2)).add(&Series1::new(one));
        assert_eq!(du, rhs);
    }

    #[test]
    fn two_tan_routes_agree() {
        for k in [0, 1, 5, 20, 50] {
            assert_eq!(ode_lower_series(k), scaled_tan_series(k), "K = {k}");
        }
    }

    #[test]
    fn xi_series_coefficients() {
        let t = build_htable(6);
        let xi = xi_univariate(&t, 2).unwrap();
        assert_eq!(xi.order(), 5);
        assert_eq!(xi.coeff(1), Some(&rat(1, 1)));
        assert_eq!(xi.coeff(2), Some(&rat(0, 1)));
        assert_eq!(xi.coeff(5), Some(&rat(19, 120)));
        assert!(xi_univariate(&t, 4).is_err());
    }

    #[test]
    fn xi_bivariate_coefficients() {
        let t = build_htable(6);
        let xi = xi_bivariate(&t, 7).unwrap();
        assert_eq!(xi.coeff(0, 1), rat(1, 1));
        assert_eq!(xi.coeff(1, 2), rat(1, 2));
        assert_eq!(xi.coeff(0, 2), rat(0, 1));
        assert_eq!(xi.coeff(1, 4), rat(11, 24));
        assert_eq!(xi.terms().count(), t.len());
        assert!(xi_bivariate(&t, 8).is_err());
    }

    #[test]
    fn pde_residual_low_orders() {
        let t = build_htable(4);
        let xi = xi_bivariate(&t, 5).unwrap();
        let r = pde_residual(&xi);
        assert_eq!(r.bound(), 4);
        assert_eq!(r.coeff(0, 0), rat(0, 1));
        assert_eq!(r.coeff(0, 1), rat(0, 1));
        assert!(r.is_zero(), "{r}");
    }

    #[test]
    fn pde_residual_vanishes_for_every_bound() {
        let t = build_htable(24);
        for v in 0..=25 {
            let r = pde_residual(&xi_bivariate(&t, v).unwrap());
            assert!(r.is_zero(), "V = {v}:\n{r}");
        }
    }

    /// A perturbed coefficient must show up in the residual.
    #[test]
    fn pde_residual_detects_corruption() {
        let t = build_htable(10);
        let mut xi = xi_bivariate(&t, 11).unwrap();
        xi.add_term(1, 4, rat(1, 1000));
        assert!(!pde_residual(&xi).is_zero());
    }

    #[test]
    fn display_formats() {
        let s = Series1::new(vec![rat(0, 1), rat(1, 1), rat(0, 1), rat(-1, 3)]);
        assert_eq!(s.to_string(), "1: 1\n3: -1/3\n");
        let t = build_htable(1);
        assert_eq!(
            xi_bivariate(&t, 2).unwrap().to_string(),
            "0 1: 1\n1 2: 1/2\n"
        );
    }

    fn series(order: usize) -> impl Strategy<Value = Series1> {
        proptest::collection::vec((-50i64..50, 1i64..20), order + 1)
            .prop_map(|cs| Series1::new(cs.into_iter().map(|(p, q)| rat(p, q)).collect()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn multiplication_commutes_and_associates(
            (a, b, c) in (0usize..=20).prop_flat_map(|n| (series(n), series(n), series(n)))
        ) {
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        }
    }
}
