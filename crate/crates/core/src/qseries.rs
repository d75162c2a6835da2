//! q-Pochhammer symbols and the coefficient factors built from them.
//!
//! Everything here is evaluated in the log domain. With `q = 0.001` and
//! `n = 6` the raw factor `(q^-n; q)_k` already reaches `1e63`, and the
//! products that enter the Wigner sums span far more than that, so values are
//! carried as a [`SignedLog`] and powers of `q` are accumulated as exact
//! half-integers ([`QExponent`]) before a single exponentiation.

use std::ops::{Add, Div, Mul, Neg};

use crate::error::{Error, Result};

/// A real number stored as `sign * exp(log_magnitude)`.
///
/// Exact zero is `log_magnitude == -inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLog {
    log_magnitude: f64,
    sign: i8,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        log_magnitude: f64::NEG_INFINITY,
        sign: 1,
    };
    pub const ONE: SignedLog = SignedLog {
        log_magnitude: 0.0,
        sign: 1,
    };

    /// Builds a value from its parts. A negative `sign` means negative,
    /// anything else positive.
    pub fn new(log_magnitude: f64, sign: i8) -> Self {
        SignedLog {
            log_magnitude,
            sign: if sign < 0 { -1 } else { 1 },
        }
    }

    /// `exp(log_magnitude)`, always positive.
    pub fn from_log(log_magnitude: f64) -> Self {
        SignedLog::new(log_magnitude, 1)
    }

    pub fn from_f64(value: f64) -> Self {
        if value == 0.0 {
            SignedLog::ZERO
        } else {
            SignedLog::new(value.abs().ln(), if value < 0.0 { -1 } else { 1 })
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            f64::from(self.sign) * self.log_magnitude.exp()
        }
    }

    pub fn log_magnitude(self) -> f64 {
        self.log_magnitude
    }

    /// `+1` or `-1`. Zero reports `+1`.
    pub fn sign(self) -> i8 {
        self.sign
    }

    pub fn is_zero(self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }

    pub fn abs(self) -> Self {
        SignedLog::new(self.log_magnitude, 1)
    }

    pub fn recip(self) -> Self {
        SignedLog::new(-self.log_magnitude, self.sign)
    }

    /// Square root of a non-negative value.
    pub fn sqrt(self) -> Result<Self> {
        if self.sign < 0 && !self.is_zero() {
            return Err(Error::domain(
                "sqrt argument",
                self.to_f64(),
                "must be non-negative",
            ));
        }
        Ok(SignedLog::from_log(0.5 * self.log_magnitude))
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;

    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.is_zero() || rhs.is_zero() {
            return SignedLog::ZERO;
        }
        SignedLog::new(self.log_magnitude + rhs.log_magnitude, self.sign * rhs.sign)
    }
}

impl Div for SignedLog {
    type Output = SignedLog;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: SignedLog) -> SignedLog {
        self * rhs.recip()
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;

    fn neg(self) -> SignedLog {
        SignedLog::new(self.log_magnitude, -self.sign)
    }
}

/// An exponent of `q` restricted to multiples of one half, stored as twice
/// its value so that sums stay exact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct QExponent {
    halves: i64,
}

impl QExponent {
    pub fn from_halves(halves: i64) -> Self {
        QExponent { halves }
    }

    pub fn from_int(value: i64) -> Self {
        QExponent { halves: 2 * value }
    }

    pub fn halves(self) -> i64 {
        self.halves
    }

    pub fn value(self) -> f64 {
        self.halves as f64 * 0.5
    }

    /// `q^self` given `ln q`.
    pub fn power_of(self, ln_q: f64) -> SignedLog {
        if self.halves == 0 {
            SignedLog::ONE
        } else {
            SignedLog::from_log(self.value() * ln_q)
        }
    }
}

impl Add for QExponent {
    type Output = QExponent;

    fn add(self, rhs: QExponent) -> QExponent {
        QExponent {
            halves: self.halves + rhs.halves,
        }
    }
}

/// The symbol `(q^e; q)_k` for an integer exponent `e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QPochhammerSpec {
    pub a_exponent: i64,
    pub q: f64,
    pub k: usize,
}

impl QPochhammerSpec {
    pub fn new(a_exponent: i64, q: f64, k: usize) -> Result<Self> {
        check_q(q)?;
        Ok(QPochhammerSpec { a_exponent, q, k })
    }

    pub fn evaluate(&self) -> Result<SignedLog> {
        if self.a_exponent <= 0 {
            q_pochhammer_neg_power((-self.a_exponent) as usize, self.q, self.k)
        } else {
            // (q^e; q)_k = (q; q)_{e+k-1} / (q; q)_{e-1}
            let e = self.a_exponent as usize;
            let ln = ln_q_factorial(self.q, e + self.k - 1) - ln_q_factorial(self.q, e - 1);
            Ok(SignedLog::from_log(ln))
        }
    }
}

fn check_q(q: f64) -> Result<()> {
    if q.is_finite() && q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::domain("q", q, "must lie strictly inside (0, 1)"))
    }
}

/// `ln(1 - q^i)` for `i >= 1`, accurate at both ends of `(0, 1)`.
fn ln_one_minus_q_pow(ln_q: f64, i: usize) -> f64 {
    let t = i as f64 * ln_q;
    let qi = t.exp();
    if qi < 0.5 {
        (-qi).ln_1p()
    } else {
        (-t.exp_m1()).ln()
    }
}

/// `ln (q; q)_k`. The symbol is positive for `0 < q < 1`.
pub fn ln_q_factorial(q: f64, k: usize) -> f64 {
    let ln_q = q.ln();
    (1..=k).map(|i| ln_one_minus_q_pow(ln_q, i)).sum()
}

/// `(a; q)_k = prod_{j<k} (1 - a q^j)` by direct multiplication in the log
/// domain.
pub fn q_pochhammer(a: f64, q: f64, k: usize) -> Result<SignedLog> {
    check_q(q)?;
    if !a.is_finite() {
        return Err(Error::domain("a", a, "must be finite"));
    }
    let mut acc = SignedLog::ONE;
    let mut qj = 1.0;
    for _ in 0..k {
        let t = a * qj;
        let factor = 1.0 - t;
        if factor == 0.0 {
            return Ok(SignedLog::ZERO);
        }
        let ln = if t.abs() < 0.5 {
            (-t).ln_1p()
        } else {
            factor.abs().ln()
        };
        acc = acc * SignedLog::new(ln, if factor < 0.0 { -1 } else { 1 });
        qj *= q;
    }
    Ok(acc)
}

/// `(q^-n; q)_k` split as `sign * q^exponent * exp(rest)` where `rest`
/// carries no power of `q`.
#[derive(Clone, Copy, Debug)]
struct NegPowerParts {
    sign: i8,
    exponent: QExponent,
    ln_rest: f64,
}

fn neg_power_parts(n: usize, q: f64, k: usize) -> Option<NegPowerParts> {
    if k > n {
        return None;
    }
    let (n_i, k_i) = (n as i64, k as i64);
    // (q^-n; q)_k = (-1)^k q^{k(k-1)/2 - nk} (q;q)_n / (q;q)_{n-k}
    Some(NegPowerParts {
        sign: if k.is_multiple_of(2) { 1 } else { -1 },
        exponent: QExponent::from_halves(k_i * (k_i - 1) - 2 * n_i * k_i),
        ln_rest: ln_q_factorial(q, n) - ln_q_factorial(q, n - k),
    })
}

/// `(q^-n; q)_k` via the factored identity. Returns exact zero for `k > n`.
pub fn q_pochhammer_neg_power(n: usize, q: f64, k: usize) -> Result<SignedLog> {
    check_q(q)?;
    Ok(match neg_power_parts(n, q, k) {
        None => SignedLog::ZERO,
        Some(parts) => {
            parts.exponent.power_of(q.ln()) * SignedLog::new(parts.ln_rest, parts.sign)
        }
    })
}

/// One oscillator's share of the coefficient:
/// `(q^-n;q)_k / (q;q)_k * q^{nk - k^2/2}` with its `q` power kept apart.
fn coefficient_parts(n: usize, k: usize, q: f64) -> Option<(i8, QExponent, f64)> {
    let parts = neg_power_parts(n, q, k)?;
    let (n_i, k_i) = (n as i64, k as i64);
    let exponent = parts.exponent + QExponent::from_halves(2 * n_i * k_i - k_i * k_i);
    Some((parts.sign, exponent, parts.ln_rest - ln_q_factorial(q, k)))
}

/// The coefficient
/// `[(q_a^-n;q_a)_k / (q_a;q_a)_k] [(q_b^-m;q_b)_s / (q_b;q_b)_s]
///  q_a^{nk - k^2/2} q_b^{ms - s^2/2}`.
///
/// Vanishes when `k > n` or `s > m`. When `q_a == q_b` the two powers of `q`
/// are merged into one exponent before exponentiation.
pub fn b_factor(
    n: usize,
    m: usize,
    k: usize,
    s: usize,
    q_a: f64,
    q_b: f64,
) -> Result<SignedLog> {
    check_q(q_a)?;
    check_q(q_b)?;
    let (Some((sign_a, exp_a, rest_a)), Some((sign_b, exp_b, rest_b))) = (
        coefficient_parts(n, k, q_a),
        coefficient_parts(m, s, q_b),
    ) else {
        return Ok(SignedLog::ZERO);
    };
    let powers = if q_a == q_b {
        (exp_a + exp_b).power_of(q_a.ln())
    } else {
        exp_a.power_of(q_a.ln()) * exp_b.power_of(q_b.ln())
    };
    Ok(powers * SignedLog::new(rest_a + rest_b, sign_a * sign_b))
}

/// Single-`q` form of [`b_factor`].
pub fn b_factor_single(n: usize, m: usize, k: usize, s: usize, q: f64) -> Result<SignedLog> {
    b_factor(n, m, k, s, q, q)
}
