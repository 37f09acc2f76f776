use std::fmt;
use std::str::FromStr;

use num_traits::Signed;
use rayon::prelude::*;

use super::{check_interval, ApproxError, KernelApproximant};
use crate::algebra::{from_f64, int, to_f64, ExactScalar, Polynomial};
use crate::funcspec::{FunctionSpec, Value};

/// Default number of grid intervals (2001 points).
pub const DEFAULT_GRID: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormExponent {
    Finite(f64),
    Infinity,
}

impl FromStr for NormExponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
            return Ok(NormExponent::Infinity);
        }
        match s.parse::<f64>() {
            Ok(p) if p >= 1.0 && p.is_finite() => Ok(NormExponent::Finite(p)),
            Ok(p) if p.is_infinite() => Ok(NormExponent::Infinity),
            _ => Err(format!(
                "norm exponent must be a number >= 1 or 'inf', got {s:?}"
            )),
        }
    }
}

impl fmt::Display for NormExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormExponent::Finite(p) => write!(f, "{p}"),
            NormExponent::Infinity => f.write_str("inf"),
        }
    }
}

/// Dense-grid error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub sup_estimate: f64,
    pub lp_estimates: Vec<(NormExponent, f64)>,
    /// Number of grid intervals; the grid has `grid_size + 1` points.
    pub grid_size: usize,
}

impl ErrorReport {
    pub fn norm_exponents(&self) -> Vec<NormExponent> {
        self.lp_estimates.iter().map(|(p, _)| *p).collect()
    }

    pub fn lp(&self, p: NormExponent) -> Option<f64> {
        self.lp_estimates
            .iter()
            .find(|(q, _)| *q == p)
            .map(|(_, v)| *v)
    }
}

/// `grid + 1` equispaced rational points `a + (b − a)·i/grid`.
pub fn grid_points(interval: (f64, f64), grid: usize) -> Vec<ExactScalar> {
    let a = from_f64(interval.0);
    let width = from_f64(interval.1) - &a;
    let n = int(grid as i64);
    (0..=grid)
        .map(|i| &a + &width * int(i as i64) / &n)
        .collect()
}

fn check_grid(grid: usize) -> Result<(), ApproxError> {
    if grid < 2 {
        return Err(ApproxError::InvalidArgument(format!(
            "grid must have at least 2 intervals, got {grid}"
        )));
    }
    Ok(())
}

fn report(
    interval: (f64, f64),
    grid: usize,
    errors: &[f64],
    exponents: &[NormExponent],
) -> ErrorReport {
    let sup = errors.iter().copied().fold(0.0, f64::max);
    let h = (interval.1 - interval.0) / grid as f64;
    let lp_estimates = exponents
        .iter()
        .map(|&p| {
            let value = match p {
                NormExponent::Infinity => sup,
                NormExponent::Finite(p) => {
                    let last = errors.len() - 1;
                    let weighted: f64 = errors
                        .iter()
                        .enumerate()
                        .map(|(i, e)| {
                            let w = if i == 0 || i == last { 0.5 } else { 1.0 };
                            w * e.powf(p)
                        })
                        .sum();
                    (weighted * h).powf(1.0 / p)
                }
            };
            (p, value)
        })
        .collect();
    ErrorReport {
        sup_estimate: sup,
        lp_estimates,
        grid_size: grid,
    }
}

fn measure_with<F>(
    interval: (f64, f64),
    grid: usize,
    exponents: &[NormExponent],
    error_at: F,
) -> Result<ErrorReport, ApproxError>
where
    F: Fn(&ExactScalar) -> Result<f64, ApproxError> + Sync,
{
    check_interval(interval)?;
    check_grid(grid)?;
    let points = grid_points(interval, grid);
    // collected in order so the quadrature sum is independent of thread count
    let errors: Vec<f64> = points.par_iter().map(&error_at).collect::<Result<_, _>>()?;
    Ok(report(interval, grid, &errors, exponents))
}

/// Sup and `L^p` estimates of `f − approx` on `grid + 1` equispaced points
/// (composite trapezoid rule for finite `p`).
pub fn measure_error(
    f: &FunctionSpec,
    approx: &KernelApproximant,
    interval: (f64, f64),
    grid: usize,
    exponents: &[NormExponent],
) -> Result<ErrorReport, ApproxError> {
    measure_with(interval, grid, exponents, |x| {
        let g = approx.eval_exact(x);
        Ok(match f.eval_exact(x)? {
            Value::Exact(v) => to_f64(&(v - g).abs()),
            Value::Float(v) => (v - to_f64(&g)).abs(),
        })
    })
}

/// Same as [`measure_error`] with an exact polynomial target; every pointwise
/// error is computed in rational arithmetic.
pub fn measure_polynomial_error(
    p: &Polynomial,
    approx: &KernelApproximant,
    interval: (f64, f64),
    grid: usize,
    exponents: &[NormExponent],
) -> Result<ErrorReport, ApproxError> {
    measure_with(interval, grid, exponents, |x| {
        Ok(to_f64(&(p.eval(x) - approx.eval_exact(x)).abs()))
    })
}
