//! Bounds, asymptotics and the elliptic-integral identity.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::exactmath::{
    bernoulli, catalan, factorial, format_rational, format_significant, log_rational,
    HighPrecisionReal,
};
use crate::recurrence::HTable;
use crate::series::scaled_tan_series;

/// The published `(n, delta_n / n)` values, three decimals.
pub const PAPER_DELTA_TABLE: [(usize, f64); 8] = [
    (10, -0.634),
    (20, -0.750),
    (30, -0.790),
    (40, -0.811),
    (50, -0.824),
    (100, -0.849),
    (150, -0.858),
    (200, -0.862),
];

/// Sample points of [`PAPER_DELTA_TABLE`].
pub const DEFAULT_POINTS: [usize; 8] = [10, 20, 30, 40, 50, 100, 150, 200];

#[derive(Clone, Debug)]
pub struct AsymptoticRow {
    pub n: usize,
    pub h: BigRational,
    pub log_h: HighPrecisionReal,
    pub delta: HighPrecisionReal,
    pub delta_over_n: HighPrecisionReal,
}

/// Header of the CSV table output.
pub const CSV_HEADER: &str = "n,h,log_h,delta,delta_over_n";

/// Significant digits used for every real in table output.
pub const OUTPUT_DIGITS: usize = 9;

impl AsymptoticRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n,
            format_rational(&self.h),
            format_significant(self.log_h.to_f64(), OUTPUT_DIGITS),
            format_significant(self.delta.to_f64(), OUTPUT_DIGITS),
            format_significant(self.delta_over_n.to_f64(), OUTPUT_DIGITS),
        )
    }

    /// One JSON record with the CSV field names; `h` stays an exact `p/q` string.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.n,
            "h": format_rational(&self.h),
            "log_h": json_real(&self.log_h),
            "delta": json_real(&self.delta),
            "delta_over_n": json_real(&self.delta_over_n),
        })
    }
}

fn json_real(x: &HighPrecisionReal) -> serde_json::Value {
    let rounded: f64 = format_significant(x.to_f64(), OUTPUT_DIGITS)
        .parse()
        .expect("formatted float parses");
    serde_json::Value::from(rounded)
}

fn real(n: i64, p: u32) -> HighPrecisionReal {
    HighPrecisionReal::from_i64(n, p)
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(p.into(), q.into())
}

/// `delta_n = log h(n) - 2n (1 + log(n/(2n+1))) + 3/2 log(2n+1) - 1 + 1/2 log(2 pi)`,
/// the part of `log g(n)` left after `2n log n` and the Stirling terms.
pub fn delta(n: usize, table: &HTable, precision: u32) -> Result<AsymptoticRow> {
    if n == 0 {
        return Err(Error::Domain("delta_n is defined for n >= 1".into()));
    }
    let h = table.h(n)?.clone();
    let p = precision;
    let ni = n as i64;
    let log_h = log_rational(&h, p)?;
    let log_ratio = log_rational(&ratio(ni, 2 * ni + 1), p)?;
    let log_odd = log_rational(&ratio(2 * ni + 1, 1), p)?;
    let log_two_pi = (HighPrecisionReal::pi(p) * real(2, p)).ln()?;
    let half = HighPrecisionReal::from_rational(&ratio(1, 2), p);
    let three_halves = HighPrecisionReal::from_rational(&ratio(3, 2), p);

    let delta = &log_h - &(real(2 * ni, p) * (real(1, p) + log_ratio)) + three_halves * log_odd
        - real(1, p)
        + half * log_two_pi;
    let delta_over_n = &delta / &real(ni, p);
    Ok(AsymptoticRow {
        n,
        h,
        log_h,
        delta,
        delta_over_n,
    })
}

/// Rows for several sample points.
pub fn delta_rows(points: &[usize], table: &HTable, precision: u32) -> Result<Vec<AsymptoticRow>> {
    points.iter().map(|&n| delta(n, table, precision)).collect()
}

/// `u_0 ..= u_{n_max}`, the odd coefficients of `sqrt(2) tan(t / sqrt(2))`.
pub fn lower_bound_coefficients(n_max: usize) -> Vec<BigRational> {
    scaled_tan_series(n_max)
        .coeffs()
        .iter()
        .skip(1)
        .step_by(2)
        .cloned()
        .collect()
}

/// `h(n) >= u_n`, the coefficient of `t^{2n+1}` in the comparison ODE solution.
pub fn check_lower_bound(n: usize, table: &HTable) -> Result<bool> {
    let h = table.h(n)?;
    Ok(h >= &lower_bound_coefficients(n)[n])
}

/// `h(n) <= C_n` and `g(n) <= 2^{2n} (2n+1)! / (n+1)`.
pub fn check_upper_bound(n: usize, table: &HTable) -> Result<bool> {
    let h = table.h(n)?;
    let catalan_ok = h <= &BigRational::from_integer(catalan(n as u64));
    let g = BigRational::from_integer(table.g(n)?);
    let estimate = BigRational::new(
        (BigInt::one() << (2 * n)) * factorial(2 * n as u64 + 1),
        BigInt::from(n + 1),
    );
    Ok(catalan_ok && g <= estimate)
}

/// `g(n) < (2n+1)!`, i.e. `h(n) < 1`; only meaningful for `n >= 1`.
pub fn check_conjecture_a(n: usize, table: &HTable) -> Result<bool> {
    if n == 0 {
        return Err(Error::Domain(
            "the strict inequality is stated for n >= 1 (h(0) = 1)".into(),
        ));
    }
    Ok(table.h(n)? < &BigRational::one())
}

/// Outcome of every exact bound at one `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCheck {
    pub n: usize,
    pub lower: bool,
    pub upper_catalan: bool,
    pub upper_estimate: bool,
    pub conjecture: Option<bool>,
    pub integral: bool,
}

impl BoundCheck {
    pub fn all_hold(&self) -> bool {
        self.lower
            && self.upper_catalan
            && self.upper_estimate
            && self.conjecture.unwrap_or(true)
            && self.integral
    }
}

/// All exact bounds for `0 ..= n_max`, sharing one tan series.
pub fn check_bounds_range(table: &HTable, n_max: usize) -> Result<Vec<BoundCheck>> {
    table.h(n_max)?;
    let lower = lower_bound_coefficients(n_max);
    let mut fact = BigInt::one();
    (0..=n_max)
        .map(|n| {
            if n > 0 {
                fact *= (2 * n) * (2 * n + 1);
            }
            let h = table.h(n)?;
            let scaled = h * BigRational::from_integer(fact.clone());
            let integral = scaled.denom().is_one();
            let estimate =
                BigRational::new((BigInt::one() << (2 * n)) * &fact, BigInt::from(n + 1));
            Ok(BoundCheck {
                n,
                lower: h >= &lower[n],
                upper_catalan: h <= &BigRational::from_integer(catalan(n as u64)),
                upper_estimate: scaled <= estimate,
                conjecture: (n >= 1).then(|| h < &BigRational::one()),
                integral,
            })
        })
        .collect()
}

/// `log g(n) / (n log n)` with `log g(n) = log h(n) + log (2n+1)!`.
pub fn arnold_ratio(n: usize, table: &HTable, precision: u32) -> Result<HighPrecisionReal> {
    if n < 2 {
        return Err(Error::Domain("the ratio needs n >= 2".into()));
    }
    let p = precision;
    let log_h = log_rational(table.h(n)?, p)?;
    let log_fact = log_rational(&BigRational::from_integer(factorial(2 * n as u64 + 1)), p)?;
    let log_n = log_rational(&ratio(n as i64, 1), p)?;
    Ok((log_h + log_fact) / (real(n as i64, p) * log_n))
}

/// `|B_{2k}| (4 pi^2)^k / (2 (2k)!)`, which tends to 1 from above.
pub fn bernoulli_ratio(k: usize, precision: u32) -> Result<HighPrecisionReal> {
    if k == 0 {
        return Err(Error::Domain("bernoulli_ratio needs k >= 1".into()));
    }
    let p = precision;
    let b = HighPrecisionReal::from_rational(&bernoulli(2 * k).abs(), p);
    let pi = HighPrecisionReal::pi(p);
    let four_pi2 = &pi * &pi * real(4, p);
    let denom = HighPrecisionReal::from_bigint(&(factorial(2 * k as u64) * 2u32), p);
    Ok(b * four_pi2.powi(k as u32) / denom)
}

/// Largest `xi*` accepted by [`elliptic_theta`].
pub const ELLIPTIC_MAX_XI: f64 = 0.3;

fn radicand(t: f64, xi: f64) -> f64 {
    t.powi(4) / 4.0 - t * t + 2.0 * xi * t + 1.0
}

/// `theta(xi*) = int_0^{xi*} dt / sqrt(t^4/4 - t^2 + 2 xi* t + 1)` by adaptive
/// Simpson quadrature to absolute tolerance `tol`.
pub fn elliptic_theta(xi_star: f64, tol: f64) -> Result<f64> {
    if !(0.0..=ELLIPTIC_MAX_XI).contains(&xi_star) {
        return Err(Error::Domain(format!(
            "xi* = {xi_star} outside the supported range [0, {ELLIPTIC_MAX_XI}]"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Domain(format!("tolerance {tol} must be positive")));
    }
    if xi_star == 0.0 {
        return Ok(0.0);
    }
    const SAMPLES: usize = 1024;
    for i in 0..=SAMPLES {
        let t = xi_star * i as f64 / SAMPLES as f64;
        let r = radicand(t, xi_star);
        if r.is_nan() || r <= 0.0 {
            return Err(Error::Domain(format!(
                "radicand {r} is not positive at t = {t} for xi* = {xi_star}"
            )));
        }
    }
    let f = |t: f64| 1.0 / radicand(t, xi_star).sqrt();
    Ok(adaptive_simpson(&f, 0.0, xi_star, tol))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// `sum_{n <= n_max} h(n) theta^{2n+1}` in double precision.
pub fn xi_series_value(table: &HTable, n_max: usize, theta: f64) -> Result<f64> {
    let theta2 = theta * theta;
    let mut power = theta;
    let mut sum = 0.0;
    for n in 0..=n_max {
        let h = table.h(n)?.to_f64().expect("h(n) is a finite rational");
        sum += h * power;
        power *= theta2;
    }
    Ok(sum)
}

/// Least-squares fit of `delta_n ~ a n + b log n + c`.
#[derive(Clone, Debug)]
pub struct RemainderFit {
    pub a: HighPrecisionReal,
    pub b: HighPrecisionReal,
    pub c: HighPrecisionReal,
}

/// Ordinary least squares over `(n, delta_n)` points, needing at least four
/// distinct `n`. Heuristic: nothing guarantees the model is exact.
pub fn fit_remainder(
    points: &[(usize, HighPrecisionReal)],
    precision: u32,
) -> Result<RemainderFit> {
    let mut distinct: Vec<usize> = points.iter().map(|(n, _)| *n).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 || distinct[0] == 0 {
        return Err(Error::Domain(format!(
            "degenerate fit: need at least 4 distinct n >= 1, got {distinct:?}"
        )));
    }
    let p = precision + 64;
    let mut normal = vec![vec![HighPrecisionReal::zero(p); 4]; 3];
    for (n, d) in points {
        let features = [
            real(*n as i64, p),
            log_rational(&ratio(*n as i64, 1), p)?,
            real(1, p),
        ];
        for i in 0..3 {
            for j in 0..3 {
                normal[i][j] = &normal[i][j] + &(&features[i] * &features[j]);
            }
            normal[i][3] = &normal[i][3] + &(&features[i] * &d.with_precision(p));
        }
    }
    let coef = solve_augmented(normal)?;
    let [a, b, c] = coef.map(|x| x.with_precision(precision));
    Ok(RemainderFit { a, b, c })
}

/// Heuristic estimate of the linear coefficient `a` in
/// `delta_n ~ a n + b log n + c`.
pub fn estimate_a(rows: &[AsymptoticRow], precision: u32) -> Result<HighPrecisionReal> {
    let points: Vec<(usize, HighPrecisionReal)> =
        rows.iter().map(|r| (r.n, r.delta.clone())).collect();
    Ok(fit_remainder(&points, precision)?.a)
}

/// Gauss-Jordan elimination with partial pivoting on a 3x4 augmented matrix.
fn solve_augmented(mut m: Vec<Vec<HighPrecisionReal>>) -> Result<[HighPrecisionReal; 3]> {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| {
                m[i][col]
                    .abs()
                    .partial_cmp(&m[j][col].abs())
                    .expect("total order")
            })
            .expect("non-empty");
        if m[pivot][col].is_zero() {
            return Err(Error::Domain("singular normal equations".into()));
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row == col {
                continue;
            }
            let factor = &m[row][col] / &m[col][col];
            let pivot_row = m[col].clone();
            for (target, p) in m[row].iter_mut().zip(&pivot_row).skip(col) {
                *target = &*target - &(&factor * p);
            }
        }
    }
    Ok([0, 1, 2].map(|i| &m[i][3] / &m[i][i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recurrence::build_htable;

    const P: u32 = 128;

    #[test]
    fn bound_examples() {
        let t = build_htable(6);
        for n in 0..=3 {
            assert!(check_lower_bound(n, &t).unwrap());
            assert!(check_upper_bound(n, &t).unwrap());
        }
        assert!(check_conjecture_a(1, &t).unwrap());
        assert!(check_conjecture_a(2, &t).unwrap());
        assert!(check_conjecture_a(0, &t).is_err());
        assert!(check_lower_bound(4, &t).is_err());
        // equality at n = 0 on both sides
        assert_eq!(t.h(0).unwrap(), &lower_bound_coefficients(0)[0]);
        assert_eq!(t.h(0).unwrap(), &BigRational::from_integer(catalan(0)));
    }

    #[test]
    fn range_check_agrees_with_single_checks() {
        let t = build_htable(40);
        let all = check_bounds_range(&t, 20).unwrap();
        assert_eq!(all.len(), 21);
        for c in &all {
            assert!(c.all_hold(), "{c:?}");
            assert_eq!(c.lower, check_lower_bound(c.n, &t).unwrap());
            assert_eq!(
                c.upper_catalan && c.upper_estimate,
                check_upper_bound(c.n, &t).unwrap()
            );
        }
        assert_eq!(all[0].conjecture, None);
    }

    #[test]
    fn lower_bound_coefficients_are_strictly_below_h() {
        let t = build_htable(20);
        let u = lower_bound_coefficients(10);
        assert_eq!(u[1], ratio(1, 6));
        assert_eq!(u[2], ratio(1, 30));
        for (n, u_n) in u.iter().enumerate().skip(1) {
            assert!(t.h(n).unwrap() > u_n);
        }
    }

    #[test]
    fn delta_matches_first_published_rows() {
        let t = build_htable(40);
        for (n, expected) in &PAPER_DELTA_TABLE[..2] {
            let row = delta(*n, &t, P).unwrap();
            assert!(
                (row.delta_over_n.to_f64() - expected).abs() <= 1e-3,
                "n = {n}"
            );
        }
        assert!(delta(0, &t, P).is_err());
        assert!(delta(21, &t, P).is_err());
    }

    #[test]
    fn row_output_formats() {
        let t = build_htable(20);
        let row = delta(10, &t, P).unwrap();
        let line = row.csv_line();
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), CSV_HEADER.split(',').count());
        assert_eq!(fields[0], "10");
        assert_eq!(fields[1], format_rational(&row.h));
        assert!(fields[4].starts_with("-0.634"), "{line}");
        let json = row.to_json();
        assert_eq!(json["n"], 10);
        assert_eq!(json["h"], fields[1]);
        assert_eq!(json["delta_over_n"].as_f64(), fields[4].parse::<f64>().ok());
    }

    #[test]
    fn delta_row_is_self_consistent() {
        let t = build_htable(20);
        let row = delta(10, &t, P).unwrap();
        assert_eq!(&row.h, t.h(10).unwrap());
        let back = &row.delta_over_n * &real(10, P);
        assert!((back.to_f64() - row.delta.to_f64()).abs() < 1e-12);
        // log h in double precision as a sanity check
        let approx = row.h.to_f64().unwrap().ln();
        assert!((row.log_h.to_f64() - approx).abs() < 1e-12);
    }

    #[test]
    fn arnold_ratio_tracks_stirling_bookkeeping() {
        let t = build_htable(60);
        let r10 = arnold_ratio(10, &t, P).unwrap();
        let r30 = arnold_ratio(30, &t, P).unwrap();
        assert!(r30 > r10);
        assert!(r30.to_f64() < 2.0);
        // log g = 2n log n + delta_n + O(1/n)
        let n = 30.0f64;
        let d = delta(30, &t, P).unwrap().delta.to_f64();
        let predicted = 2.0 + d / (n * n.ln());
        let stirling_slack = 1.0 / (12.0 * (2.0 * n + 1.0) * n * n.ln());
        assert!((r30.to_f64() - predicted).abs() <= 2.0 * stirling_slack);
        assert!(arnold_ratio(1, &t, P).is_err());
    }

    #[test]
    fn bernoulli_ratio_values() {
        let r1 = bernoulli_ratio(1, P).unwrap().to_f64();
        assert!((r1 - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-15);
        assert!((bernoulli_ratio(5, P).unwrap().to_f64() - 1.0).abs() < 1e-3);
        assert!((bernoulli_ratio(10, P).unwrap().to_f64() - 1.0).abs() < 1e-6);
        let one = real(1, P);
        let mut prev = bernoulli_ratio(1, P).unwrap();
        for k in 2..=25 {
            let r = bernoulli_ratio(k, P).unwrap();
            assert!(r < prev && r >= one, "k = {k}");
            prev = r;
        }
        assert!(bernoulli_ratio(0, P).is_err());
    }

    #[test]
    fn elliptic_theta_basics() {
        assert_eq!(elliptic_theta(0.0, 1e-12).unwrap(), 0.0);
        let th = elliptic_theta(0.1, 1e-12).unwrap();
        assert!((th - 0.1).abs() < 1e-2);
        assert!(th < 0.1);
        assert!(elliptic_theta(0.5, 1e-12).is_err());
        assert!(elliptic_theta(-0.1, 1e-12).is_err());
        assert!(elliptic_theta(0.1, 0.0).is_err());
        // reference value from an independent 30-digit quadrature
        assert!((th - 0.099_668_406_022_824_57).abs() < 1e-13);
    }

    #[test]
    fn elliptic_round_trip_small() {
        let t = build_htable(100);
        for xi in [0.05, 0.1, 0.2] {
            let theta = elliptic_theta(xi, 1e-12).unwrap();
            let back = xi_series_value(&t, 50, theta).unwrap();
            assert!((back - xi).abs() <= 1e-8, "xi = {xi}: {back}");
        }
    }

    #[test]
    fn fit_recovers_exact_model() {
        let points: Vec<(usize, HighPrecisionReal)> = [10usize, 20, 35, 50, 80]
            .iter()
            .map(|&n| {
                let v = HighPrecisionReal::from_rational(&ratio(-(n as i64), 2), P) + real(2, P);
                (n, v)
            })
            .collect();
        let fit = fit_remainder(&points, P).unwrap();
        assert!((fit.a.to_f64() + 0.5).abs() < 1e-9);
        assert!(fit.b.to_f64().abs() < 1e-9);
        assert!((fit.c.to_f64() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn fit_refuses_degenerate_designs() {
        let pts: Vec<(usize, HighPrecisionReal)> = [10usize, 10, 20, 30]
            .iter()
            .map(|&n| (n, real(1, P)))
            .collect();
        assert!(fit_remainder(&pts, P).is_err());
    }

    #[test]
    fn fit_on_published_values() {
        let points: Vec<(usize, HighPrecisionReal)> = PAPER_DELTA_TABLE
            .iter()
            .map(|&(n, r)| (n, HighPrecisionReal::from_f64(r * n as f64, P)))
            .collect();
        let a = fit_remainder(&points, P).unwrap().a.to_f64();
        assert!(a > -0.9 && a <= -0.8, "a = {a}");
    }
}
