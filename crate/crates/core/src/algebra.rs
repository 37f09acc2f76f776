//! Exact rational scalars, dense univariate polynomials and the A-basis.
//!
//! The A-basis is the family of polynomials produced by expanding the Poisson
//! kernel translate `1/(α² + (x − t)²)` in powers of `1/t`:
//!
//! ```text
//! A_0(x) = 1
//! A_1(x) = 2x
//! A_n(x) = 2x·A_{n−1}(x) − (x² + α²)·A_{n−2}(x)
//! ```
//!
//! `A_n` has degree `n` and leading coefficient `n + 1`, so the change of basis
//! between monomials and the A-basis is triangular.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arbitrary-precision rational. Always reduced, denominator positive.
pub type ExactScalar = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational literal {text:?}: {reason}")]
pub struct RationalParseError {
    pub text: String,
    pub reason: &'static str,
}

/// Parses `p/q`, integers, decimals (`0.25`) and scientific notation (`1e-3`)
/// into an exact rational. Decimal inputs are converted without rounding.
pub fn parse_rational(text: &str) -> Result<ExactScalar, RationalParseError> {
    let trimmed = text.trim();
    let err = |reason| RationalParseError {
        text: text.to_string(),
        reason,
    };
    if trimmed.is_empty() {
        return Err(err("empty"));
    }
    if let Some((num, den)) = trimmed.split_once('/') {
        let num = parse_decimal(num.trim()).ok_or_else(|| err("bad numerator"))?;
        let den = parse_decimal(den.trim()).ok_or_else(|| err("bad denominator"))?;
        if den.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(num / den);
    }
    parse_decimal(trimmed).ok_or_else(|| err("not a number"))
}

fn parse_decimal(text: &str) -> Option<ExactScalar> {
    let (negative, body) = match text.as_bytes().first()? {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = ExactScalar::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exponent - frac_part.len() as i32;
    let ten = ExactScalar::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= num_traits::pow(ten, scale as usize);
    } else {
        value /= num_traits::pow(ten, scale.unsigned_abs() as usize);
    }
    Some(if negative { -value } else { value })
}

/// Canonical `p/q` string (denominator always written, `3` becomes `3/1`).
pub fn format_rational(value: &ExactScalar) -> String {
    format!("{}/{}", value.numer(), value.denom())
}

/// Nearest `f64`; saturates to ±∞ for values beyond the `f64` range.
pub fn to_f64(value: &ExactScalar) -> f64 {
    value.to_f64().unwrap_or_else(|| {
        if value.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact rational equal to a finite `f64`.
///
/// # Panics
/// Panics on NaN or infinite input.
pub fn from_f64(value: f64) -> ExactScalar {
    ExactScalar::from_float(value).expect("finite float")
}

pub fn int(value: i64) -> ExactScalar {
    ExactScalar::from_integer(BigInt::from(value))
}

/// Dense polynomial over the rationals; `coeffs[i]` multiplies `x^i`.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<ExactScalar>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(value: ExactScalar) -> Self {
        Self::from_coeffs(vec![value])
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Self::from_coeffs(vec![ExactScalar::zero(), ExactScalar::one()])
    }

    /// Builds from low-to-high coefficients, trimming trailing zeros.
    pub fn from_coeffs(mut coeffs: Vec<ExactScalar>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| int(c)).collect())
    }

    pub fn coeffs(&self) -> &[ExactScalar] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<ExactScalar> {
        self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading_coeff(&self) -> Option<&ExactScalar> {
        self.coeffs.last()
    }

    /// Coefficient of `x^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> ExactScalar {
        self.coeffs
            .get(i)
            .cloned()
            .unwrap_or_else(ExactScalar::zero)
    }

    /// Exact Horner evaluation.
    pub fn eval(&self, x: &ExactScalar) -> ExactScalar {
        self.coeffs
            .iter()
            .rev()
            .fold(ExactScalar::zero(), |acc, c| acc * x + c)
    }

    /// Horner evaluation on `f64` copies of the coefficients.
    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + to_f64(c))
    }

    pub fn scale(&self, factor: &ExactScalar) -> Self {
        if factor.is_zero() {
            return Self::zero();
        }
        Self::from_coeffs(self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Multiplies by `x^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![ExactScalar::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    pub fn pow(&self, exp: u32) -> Self {
        let mut result = Self::constant(ExactScalar::one());
        for _ in 0..exp {
            result = &result * self;
        }
        result
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[")?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let mag = c.abs();
            match (i, mag.is_one()) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{mag}*x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{mag}*x^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::from_coeffs((0..len).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::from_coeffs((0..len).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![ExactScalar::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::from_coeffs(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

/// Returns `A_0, …, A_n` for the given `α²`.
pub fn a_basis_table(n: usize, alpha_sq: &ExactScalar) -> Vec<Polynomial> {
    let mut table = Vec::with_capacity(n + 1);
    table.push(Polynomial::constant(ExactScalar::one()));
    if n == 0 {
        return table;
    }
    table.push(Polynomial::from_ints(&[0, 2]));
    let two = int(2);
    for k in 2..=n {
        let prev = &table[k - 1];
        let prev2 = &table[k - 2];
        // 2x·A_{k−1} − x²·A_{k−2} − α²·A_{k−2}
        let mut coeffs = vec![ExactScalar::zero(); k + 1];
        for (i, c) in prev.coeffs().iter().enumerate() {
            coeffs[i + 1] += c * &two;
        }
        for (i, c) in prev2.coeffs().iter().enumerate() {
            coeffs[i + 2] -= c;
            coeffs[i] -= c * alpha_sq;
        }
        table.push(Polynomial::from_coeffs(coeffs));
    }
    table
}

/// `A_n(x)` as an exact polynomial.
pub fn a_basis_poly(n: usize, alpha_sq: &ExactScalar) -> Polynomial {
    a_basis_table(n, alpha_sq).pop().expect("table is nonempty")
}

/// Evaluates `A_n(x)` through the second-kind Chebyshev form
/// `A_n(x) = s^n · U_n(x/s)`, `s = √(x² + α²)`.
///
/// This never touches the polynomial recursion and serves as an independent
/// floating-point cross-check for [`a_basis_poly`].
pub fn a_basis_eval_closed(n: usize, alpha: f64, x: f64) -> f64 {
    let s = x.hypot(alpha);
    let t = x / s;
    let (mut u_prev, mut u) = (1.0, 2.0 * t);
    if n == 0 {
        return 1.0;
    }
    for _ in 1..n {
        let next = 2.0 * t * u - u_prev;
        u_prev = u;
        u = next;
    }
    s.powi(n as i32) * u
}

/// Coordinates of a polynomial in the A-basis for a fixed `α²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ABasisExpansion {
    pub alpha_sq: ExactScalar,
    /// `coeffs[k]` multiplies `A_k`; trailing zeros trimmed.
    pub coeffs: Vec<ExactScalar>,
}

impl ABasisExpansion {
    pub fn new(alpha_sq: ExactScalar, mut coeffs: Vec<ExactScalar>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { alpha_sq, coeffs }
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }
}

/// Writes `p` as `Σ c_k A_k`. Back-substitution from the top degree: the
/// leading coefficient of `A_k` is `k + 1`, so each step peels one degree.
pub fn monomial_to_abasis(p: &Polynomial, alpha_sq: &ExactScalar) -> ABasisExpansion {
    let Some(deg) = p.degree() else {
        return ABasisExpansion::new(alpha_sq.clone(), Vec::new());
    };
    let table = a_basis_table(deg, alpha_sq);
    let mut rest: Vec<ExactScalar> = p.coeffs().to_vec();
    let mut coeffs = vec![ExactScalar::zero(); deg + 1];
    for k in (0..=deg).rev() {
        let c = &rest[k] / int(k as i64 + 1);
        if !c.is_zero() {
            for (i, a) in table[k].coeffs().iter().enumerate() {
                rest[i] -= &c * a;
            }
        }
        debug_assert!(rest[k].is_zero());
        coeffs[k] = c;
    }
    ABasisExpansion::new(alpha_sq.clone(), coeffs)
}

pub fn abasis_to_monomial(expansion: &ABasisExpansion) -> Polynomial {
    let Some(deg) = expansion.degree() else {
        return Polynomial::zero();
    };
    let table = a_basis_table(deg, &expansion.alpha_sq);
    let mut out = vec![ExactScalar::zero(); deg + 1];
    for (c, a) in expansion.coeffs.iter().zip(&table) {
        if c.is_zero() {
            continue;
        }
        for (i, ai) in a.coeffs().iter().enumerate() {
            out[i] += c * ai;
        }
    }
    Polynomial::from_coeffs(out)
}
