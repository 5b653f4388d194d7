//! Special functions and signed log-space arithmetic.
//!
//! Products of Pochhammer symbols and gamma ratios overflow for sample
//! sizes in the thousands, so everything here is carried as a sign and the
//! logarithm of the absolute value; callers exponentiate only at the end.

use std::cmp::Ordering;
use std::ops::{Div, Mul, Neg};

use crate::error::{domain, Result};

/// A real number stored as `sign * exp(log_abs)`.
///
/// `sign == 0` represents exactly zero, in which case `log_abs` is
/// `-inf` and carries no information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedLog {
    sign: i8,
    log_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog { sign: 0, log_abs: f64::NEG_INFINITY };
    pub const ONE: SignedLog = SignedLog { sign: 1, log_abs: 0.0 };

    pub fn new(sign: i8, log_abs: f64) -> Self {
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog { sign: sign.signum(), log_abs }
        }
    }

    /// A positive number given by its logarithm.
    pub fn from_ln(log_abs: f64) -> Self {
        Self::new(1, log_abs)
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn log_abs(&self) -> f64 {
        self.log_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.log_abs.exp(),
        }
    }

    /// Natural logarithm, defined for positive values only.
    pub fn ln(&self) -> Result<f64> {
        if self.sign > 0 {
            Ok(self.log_abs)
        } else {
            Err(domain("logarithm of a non-positive value"))
        }
    }

    pub fn powi(&self, exponent: i32) -> Self {
        if exponent == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        let sign = if self.sign < 0 && exponent % 2 != 0 { -1 } else { 1 };
        Self::new(sign, self.log_abs * f64::from(exponent))
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog::new(self.sign * rhs.sign, self.log_abs + rhs.log_abs)
    }
}

impl Div for SignedLog {
    type Output = SignedLog;
    /// Division by zero yields a value with infinite magnitude.
    fn div(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return SignedLog::ZERO;
        }
        let sign = if rhs.sign == 0 { self.sign } else { self.sign * rhs.sign };
        SignedLog::new(sign, self.log_abs - rhs.log_abs)
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;
    fn neg(self) -> SignedLog {
        SignedLog { sign: -self.sign, log_abs: self.log_abs }
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Relative size below which opposite-sign classes are treated as having
/// cancelled exactly.
const CANCELLATION_FLOOR: f64 = 1e-15;

/// Exact-sign sum of signed log values.
///
/// Positive and negative terms are accumulated separately with
/// log-sum-exp; the result is zero when the two classes agree to within
/// one part in 1e15.
pub fn signed_log_sum<I: IntoIterator<Item = SignedLog>>(terms: I) -> SignedLog {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for t in terms {
        match t.sign {
            1 => pos.push(t.log_abs),
            -1 => neg.push(t.log_abs),
            _ => {}
        }
    }
    // Sorting makes the result independent of the input order.
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    let lp = log_sum_exp(&pos);
    let ln = log_sum_exp(&neg);
    match lp.partial_cmp(&ln) {
        None => SignedLog::new(1, f64::NAN),
        Some(Ordering::Equal) => SignedLog::ZERO,
        Some(Ordering::Greater) => difference(1, lp, ln),
        Some(Ordering::Less) => difference(-1, ln, lp),
    }
}

fn difference(sign: i8, big: f64, small: f64) -> SignedLog {
    let ratio = (small - big).exp();
    if ratio > 1.0 - CANCELLATION_FLOOR {
        SignedLog::ZERO
    } else {
        SignedLog::new(sign, big + (-ratio).ln_1p())
    }
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(libm::lgamma(x))
    } else {
        Err(domain(format!("ln_gamma requires x > 0, got {x}")))
    }
}

pub(crate) fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Rising factorial `(a)_n = a (a+1) ... (a+n-1)` in signed log form.
pub fn ln_pochhammer(a: f64, n: u64) -> SignedLog {
    if n == 0 {
        return SignedLog::ONE;
    }
    if a > 0.0 {
        return SignedLog::from_ln(ln_pochhammer_positive(a, n));
    }
    // Leading factors a, a+1, ... are negative until the index passes -a.
    if a == a.round() && -a < n as f64 {
        return SignedLog::ZERO;
    }
    let negatives = ((-a).ceil() as u64).min(n);
    // |a (a+1) ... (a+m-1)| = (-a-m+1)_m
    let neg_part = ln_pochhammer_positive(-a - negatives as f64 + 1.0, negatives);
    let pos_part = if negatives < n {
        ln_pochhammer_positive(a + negatives as f64, n - negatives)
    } else {
        0.0
    };
    let sign = if negatives.is_multiple_of(2) { 1 } else { -1 };
    SignedLog::new(sign, neg_part + pos_part)
}

fn ln_pochhammer_positive(a: f64, n: u64) -> f64 {
    if n <= 64 {
        (0..n).map(|i| (a + i as f64).ln()).sum()
    } else {
        lgamma(a + n as f64) - lgamma(a)
    }
}

/// Upper incomplete gamma function `Gamma(a; x)` for any real `a` and
/// `x > 0`, in signed log form.
///
/// Uses the Legendre continued fraction when `x >= max(1, a + 1)`, the
/// power series for `a > 0` otherwise, and for `a <= 0` with `x < 1` the
/// downward recurrence `Gamma(a; x) = (Gamma(a+1; x) - x^a e^{-x}) / a`
/// started from `a + m` in `(0, 1]` (or from `E_1(x)` when `a` is an
/// integer).
pub fn upper_incomplete_gamma_ln(a: f64, x: f64) -> Result<SignedLog> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("upper incomplete gamma requires x > 0, got {x}")));
    }
    if !a.is_finite() {
        return Err(domain(format!("upper incomplete gamma requires finite a, got {a}")));
    }
    if x >= 1.0 && x >= a + 1.0 {
        return Ok(SignedLog::from_ln(continued_fraction_ln(a, x)));
    }
    if a > 1.0 {
        return Ok(SignedLog::from_ln(series_complement_ln(a, x)));
    }
    if a > 0.0 {
        return Ok(SignedLog::from_ln(small_a_ln(a, x)));
    }
    if a == 0.0 {
        return Ok(SignedLog::from_ln(exp_integral_e1(x).ln()));
    }
    // a < 0 and x < 1: walk down from the start value.
    let steps = (-a).ceil();
    let start = a + steps;
    let mut current = if start == 0.0 {
        SignedLog::from_ln(exp_integral_e1(x).ln())
    } else {
        SignedLog::from_ln(small_a_ln(start, x))
    };
    let ln_x = x.ln();
    let mut b = start;
    for _ in 0..steps as u64 {
        b -= 1.0;
        let boundary = SignedLog::from_ln(b * ln_x - x);
        current = signed_log_sum([current, -boundary]) / SignedLog::from_f64(b);
    }
    Ok(current)
}

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

fn continued_fraction_ln(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    -x + a * x.ln() + h.ln()
}

/// `ln Gamma(a; x)` via `Gamma(a) (1 - P(a, x))` with the series for `P`.
fn series_complement_ln(a: f64, x: f64) -> f64 {
    let lower = lower_series_ln(a, x);
    let lg = lgamma(a);
    let p = (lower - lg).exp();
    lg + (-p).ln_1p()
}

/// `ln gamma(a; x)`, the lower incomplete gamma function, by its power series.
fn lower_series_ln(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    -x + a * x.ln() + sum.ln()
}

/// `ln Gamma(a; x)` for `0 < a <= 1`, `x < 2`, written as
/// `(Gamma(1+a) - x^a)/a - x^a sum_{j>=1} (-x)^j / (j! (a+j))`
/// so that nothing cancels as `a -> 0`.
fn small_a_ln(a: f64, x: f64) -> f64 {
    let ln_x = x.ln();
    let head = ((lgamma(1.0 + a)).exp_m1() - (a * ln_x).exp_m1()) / a;
    let mut sum = 0.0;
    let mut power = 1.0;
    for j in 1..200 {
        let jf = j as f64;
        power *= -x / jf;
        let term = power / (a + jf);
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    (head - (a * ln_x).exp() * sum).ln()
}

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exponential integral `E_1(x) = Gamma(0; x)`.
fn exp_integral_e1(x: f64) -> f64 {
    if x >= 1.0 {
        return continued_fraction_ln(0.0, x).exp();
    }
    let mut sum = 0.0;
    let mut power = 1.0;
    for j in 1..200 {
        let jf = j as f64;
        power *= -x / jf;
        let term = power / jf;
        sum += term;
        if term.abs() < EPS * sum.abs() {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - sum
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn regularized_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(domain(format!("incomplete beta requires a, b > 0, got ({a}, {b})")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(domain(format!("incomplete beta requires x in [0, 1], got {x}")));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let ln_front = lgamma(a + b) - lgamma(a) - lgamma(b) + a * x.ln() + b * (-x).ln_1p();
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok((ln_front + beta_continued_fraction(a, b, x).ln()).exp() / a)
    } else {
        Ok(1.0 - (ln_front + beta_continued_fraction(b, a, 1.0 - x).ln()).exp() / b)
    }
}

fn beta_continued_fraction(a: f64, b: f64, x: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..100_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Quantile of the Beta(a, b) distribution by bisection on the
/// regularized incomplete beta function (absolute tolerance 1e-10).
pub fn beta_quantile(a: f64, b: f64, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("probability must be in [0, 1], got {p}")));
    }
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if regularized_incomplete_beta(a, b, mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
