//! Poisson kernel translates and their expansion in powers of `1/t`.
//!
//! For `|t| > √(x² + α²)`:
//!
//! ```text
//! 1/(α² + (x − t)²) = (1/t²) · Σ_{n≥0} A_n(x) / tⁿ
//! ```
//!
//! The truncation bound here certifies the tail only on the stricter region
//! `|t| > 2s`, `s = √(x_max² + α²)`, where the ratio `σ = s/|t|` stays below 1/2.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::algebra::{to_f64, ExactScalar};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("kernel shape parameter must be positive and finite, got alpha = {0}")]
    InvalidAlpha(f64),
    #[error("alpha^2 must be a positive rational, got {0}")]
    InvalidAlphaSq(String),
    #[error("series expansion center must be nonzero")]
    ZeroCenter,
    #[error("|t| = {t_abs} is outside the certified region |t| > 2s = {limit}")]
    OutsideCertifiedRegion { t_abs: f64, limit: f64 },
    #[error("exact evaluation needs a rational alpha^2")]
    NoExactAlphaSq,
}

/// Shape parameter `α` of `1/(α² + (x − t)²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelParams {
    alpha: f64,
    alpha_sq: Option<ExactScalar>,
}

impl KernelParams {
    /// Parameters with a rational `α²`; enables every exact code path.
    pub fn from_alpha_sq(alpha_sq: ExactScalar) -> Result<Self, KernelError> {
        if !alpha_sq.is_positive() {
            return Err(KernelError::InvalidAlphaSq(alpha_sq.to_string()));
        }
        let alpha = to_f64(&alpha_sq).sqrt();
        Ok(Self {
            alpha,
            alpha_sq: Some(alpha_sq),
        })
    }

    /// Float-only parameters.
    pub fn from_alpha(alpha: f64) -> Result<Self, KernelError> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(KernelError::InvalidAlpha(alpha));
        }
        Ok(Self {
            alpha,
            alpha_sq: None,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn alpha_sq_f64(&self) -> f64 {
        match &self.alpha_sq {
            Some(a2) => to_f64(a2),
            None => self.alpha * self.alpha,
        }
    }

    pub fn alpha_sq(&self) -> Option<&ExactScalar> {
        self.alpha_sq.as_ref()
    }

    pub fn exact_alpha_sq(&self) -> Result<&ExactScalar, KernelError> {
        self.alpha_sq.as_ref().ok_or(KernelError::NoExactAlphaSq)
    }

    /// `√(x_abs_max² + α²)`, the largest `|A_n|` growth rate on `|x| ≤ x_abs_max`.
    pub fn growth_radius(&self, x_abs_max: f64) -> f64 {
        (x_abs_max * x_abs_max + self.alpha_sq_f64()).sqrt()
    }
}

pub fn kernel_translate_eval(params: &KernelParams, center: f64, x: f64) -> f64 {
    let d = x - center;
    1.0 / (params.alpha_sq_f64() + d * d)
}

/// Exact `1/(α² + (x − center)²)`.
pub fn kernel_translate_eval_exact(
    alpha_sq: &ExactScalar,
    center: &ExactScalar,
    x: &ExactScalar,
) -> ExactScalar {
    let d = x - center;
    (alpha_sq + &d * &d).recip()
}

/// `(1/t²) · Σ_{n<terms} A_n(x)/tⁿ` in floating point. `A_n(x)` comes from the
/// scalar three-term recurrence, not from expanded polynomials.
pub fn series_partial_sum(
    params: &KernelParams,
    x: f64,
    t: f64,
    terms: usize,
) -> Result<f64, KernelError> {
    if t == 0.0 {
        return Err(KernelError::ZeroCenter);
    }
    let a2 = params.alpha_sq_f64();
    let q = x * x + a2;
    let inv_t = 1.0 / t;
    let (mut a_prev, mut a_cur) = (0.0, 1.0);
    let mut power = 1.0;
    let mut sum = 0.0;
    for n in 0..terms {
        if n > 0 {
            let next = if n == 1 {
                2.0 * x
            } else {
                2.0 * x * a_cur - q * a_prev
            };
            a_prev = a_cur;
            a_cur = next;
        }
        sum += a_cur * power;
        power *= inv_t;
    }
    Ok(sum * inv_t * inv_t)
}

/// Exact counterpart of [`series_partial_sum`].
pub fn series_partial_sum_exact(
    alpha_sq: &ExactScalar,
    x: &ExactScalar,
    t: &ExactScalar,
    terms: usize,
) -> Result<ExactScalar, KernelError> {
    if t.is_zero() {
        return Err(KernelError::ZeroCenter);
    }
    let q = x * x + alpha_sq;
    let two_x = x * ExactScalar::from_integer(2.into());
    let inv_t = t.recip();
    let mut a_prev = ExactScalar::zero();
    let mut a_cur = ExactScalar::one();
    let mut power = ExactScalar::one();
    let mut sum = ExactScalar::zero();
    for n in 0..terms {
        if n > 0 {
            let next = if n == 1 {
                two_x.clone()
            } else {
                &two_x * &a_cur - &q * &a_prev
            };
            a_prev = std::mem::replace(&mut a_cur, next);
        }
        sum += &a_cur * &power;
        power *= &inv_t;
    }
    Ok(sum * &inv_t * &inv_t)
}

/// `Σ_{n≥N} (n+1)σⁿ = σ^N((N+1) − Nσ)/(1−σ)²` for `0 ≤ σ < 1`.
pub fn weighted_geometric_tail(sigma: f64, from: usize) -> f64 {
    let n = from as f64;
    sigma.powi(from as i32) * ((n + 1.0) - n * sigma) / ((1.0 - sigma) * (1.0 - sigma))
}

// Relative headroom absorbing rounding in sqrt/powi/division.
const ROUNDING_MARGIN: f64 = 1.0 + 1e-12;

/// Upper bound on `|kernel − partial sum with N terms|` valid for every
/// `|x| ≤ x_abs_max`, from `|A_n(x)| ≤ (n+1)sⁿ`.
pub fn truncation_error_bound(
    params: &KernelParams,
    x_abs_max: f64,
    t: f64,
    terms: usize,
) -> Result<f64, KernelError> {
    let s = params.growth_radius(x_abs_max.abs());
    let t_abs = t.abs();
    if t_abs.is_nan() || t_abs <= 2.0 * s {
        return Err(KernelError::OutsideCertifiedRegion {
            t_abs,
            limit: 2.0 * s,
        });
    }
    let sigma = s / t_abs;
    Ok(weighted_geometric_tail(sigma, terms) / (t_abs * t_abs) * ROUNDING_MARGIN)
}

/// Exact residual `kernel − partial sum` at a rational point.
pub fn series_residual_exact(
    alpha_sq: &ExactScalar,
    x: &ExactScalar,
    t: &ExactScalar,
    terms: usize,
) -> Result<ExactScalar, KernelError> {
    let partial = series_partial_sum_exact(alpha_sq, x, t, terms)?;
    Ok(kernel_translate_eval_exact(alpha_sq, t, x) - partial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::int;

    fn unit() -> KernelParams {
        KernelParams::from_alpha_sq(int(1)).unwrap()
    }

    #[test]
    fn translate_values() {
        assert_eq!(kernel_translate_eval(&unit(), 0.0, 0.0), 1.0);
        let two = KernelParams::from_alpha(2.0).unwrap();
        assert_eq!(kernel_translate_eval(&two, 3.0, 1.0), 0.125);
        for h in [0.1, 1.5, 7.0] {
            assert_eq!(
                kernel_translate_eval(&two, 3.0, 3.0 + h),
                kernel_translate_eval(&two, 3.0, 3.0 - h)
            );
        }
        let exact = kernel_translate_eval_exact(&int(4), &int(3), &int(1));
        assert_eq!(exact, ExactScalar::new(1.into(), 8.into()));
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(KernelParams::from_alpha(0.0).is_err());
        assert!(KernelParams::from_alpha(f64::NAN).is_err());
        assert!(KernelParams::from_alpha_sq(int(0)).is_err());
        assert!(KernelParams::from_alpha_sq(int(-1)).is_err());
    }

    #[test]
    fn partial_sums() {
        let p = unit();
        assert!((series_partial_sum(&p, 0.0, 10.0, 1).unwrap() - 0.01).abs() < 1e-16);
        assert!((series_partial_sum(&p, 0.0, 10.0, 3).unwrap() - 0.0099).abs() < 1e-16);
        let exact = series_partial_sum_exact(&int(1), &int(0), &int(10), 3).unwrap();
        assert_eq!(exact, ExactScalar::new(99.into(), 10000.into()));
        let long = series_partial_sum(&p, 0.0, 10.0, 60).unwrap();
        assert!((long - 1.0 / 101.0).abs() < 1e-16);
        assert_eq!(
            series_partial_sum(&p, 0.0, 0.0, 3),
            Err(KernelError::ZeroCenter)
        );
    }

    #[test]
    fn bound_covers_hand_example() {
        let b = truncation_error_bound(&unit(), 0.0, 10.0, 3).unwrap();
        let resid = (1.0f64 / 101.0 - 0.0099).abs();
        assert!(b >= resid, "{b} < {resid}");
    }

    #[test]
    fn bound_is_monotone_in_terms() {
        let p = unit();
        let mut last = f64::INFINITY;
        for n in 0..30 {
            let b = truncation_error_bound(&p, 1.5, 9.0, n).unwrap();
            assert!(b >= 0.0 && b < last);
            last = b;
        }
    }

    #[test]
    fn doubling_center_shrinks_bound() {
        let p = unit();
        for n in 0..12 {
            let b1 = truncation_error_bound(&p, 2.0, 7.0, n).unwrap();
            let b2 = truncation_error_bound(&p, 2.0, 14.0, n).unwrap();
            assert!(b1 / b2 >= 2f64.powi(n as i32));
        }
    }

    #[test]
    fn certified_region_is_enforced() {
        let p = unit();
        // s = √2, so 2s ≈ 2.83
        assert!(matches!(
            truncation_error_bound(&p, 1.0, 2.8, 3),
            Err(KernelError::OutsideCertifiedRegion { .. })
        ));
        assert!(truncation_error_bound(&p, 1.0, -2.9, 3).is_ok());
    }
}
