use std::f64::consts::PI;

use super::{check_interval, ApproxError, DEFAULT_GRID};
use crate::algebra::{from_f64, int, ExactScalar, Polynomial};
use crate::funcspec::FunctionSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ProxyOptions {
    /// Degrees tried are 8, 16, 32, … up to and including this cap.
    pub max_degree: usize,
    /// Intervals of the certification grid.
    pub check_grid: usize,
}

impl Default for ProxyOptions {
    fn default() -> Self {
        Self {
            max_degree: 512,
            check_grid: 10 * DEFAULT_GRID,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxyResult {
    pub polynomial: Polynomial,
    pub degree: usize,
    /// Max `|f − p|` on the check grid.
    pub check_error: f64,
}

const START_DEGREE: usize = 8;

/// Polynomial `p` with grid sup `|f − p| ≤ tol` from Chebyshev-point
/// interpolation, using the default degree schedule and check grid.
pub fn chebyshev_proxy(
    f: &FunctionSpec,
    interval: (f64, f64),
    tol: f64,
) -> Result<Polynomial, ApproxError> {
    chebyshev_proxy_with(f, interval, tol, &ProxyOptions::default()).map(|r| r.polynomial)
}

pub fn chebyshev_proxy_with(
    f: &FunctionSpec,
    interval: (f64, f64),
    tol: f64,
    opts: &ProxyOptions,
) -> Result<ProxyResult, ApproxError> {
    check_interval(interval)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(ApproxError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if opts.check_grid < 2 {
        return Err(ApproxError::InvalidArgument("check grid too small".into()));
    }
    let (a, b) = interval;
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let check: Vec<(f64, f64)> = (0..=opts.check_grid)
        .map(|i| {
            let x = a + (b - a) * i as f64 / opts.check_grid as f64;
            let t = ((x - mid) / half).clamp(-1.0, 1.0);
            f.eval(x).map(|fx| (t, fx))
        })
        .collect::<Result<_, _>>()?;

    let mut best = (f64::INFINITY, 0);
    let mut degree = START_DEGREE.min(opts.max_degree);
    loop {
        let coeffs = interpolation_coeffs(f, mid, half, degree)?;
        let err = check
            .iter()
            .map(|&(t, fx)| (fx - clenshaw(&coeffs, t)).abs())
            .fold(0.0, f64::max);
        if err < best.0 {
            best = (err, degree);
        }
        if err <= tol {
            return Ok(ProxyResult {
                polynomial: to_monomial(&coeffs, interval),
                degree,
                check_error: err,
            });
        }
        if degree >= opts.max_degree {
            return Err(ApproxError::ToleranceUnreachable {
                tol,
                max_degree: opts.max_degree,
                best_error: best.0,
                best_degree: best.1,
            });
        }
        degree = (degree * 2).min(opts.max_degree);
    }
}

/// Chebyshev coefficients of the interpolant through the `n + 1` first-kind
/// points `cos((2k + 1)π / (2n + 2))`.
fn interpolation_coeffs(
    f: &FunctionSpec,
    mid: f64,
    half: f64,
    n: usize,
) -> Result<Vec<f64>, ApproxError> {
    let m = n + 1;
    let angles: Vec<f64> = (0..m)
        .map(|k| (2 * k + 1) as f64 * PI / (2 * m) as f64)
        .collect();
    let values: Vec<f64> = angles
        .iter()
        .map(|th| f.eval(mid + half * th.cos()))
        .collect::<Result<_, _>>()?;
    Ok((0..m)
        .map(|j| {
            let s: f64 = values
                .iter()
                .zip(&angles)
                .map(|(y, th)| y * (j as f64 * th).cos())
                .sum();
            let scale = if j == 0 { 1.0 } else { 2.0 };
            scale * s / m as f64
        })
        .collect())
}

fn clenshaw(coeffs: &[f64], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + t * b1 - b2
}

/// Exact monomial form of `Σ c_j T_j((2x − a − b)/(b − a))`, with each `f64`
/// coefficient taken at its exact binary value.
fn to_monomial(coeffs: &[f64], interval: (f64, f64)) -> Polynomial {
    let (a, b) = (from_f64(interval.0), from_f64(interval.1));
    let width = &b - &a;
    let u = Polynomial::from_coeffs(vec![-(&a + &b) / &width, int(2) / &width]);
    let two_u = u.scale(&int(2));
    let c: Vec<ExactScalar> = coeffs.iter().map(|&v| from_f64(v)).collect();
    let (mut b1, mut b2) = (Polynomial::zero(), Polynomial::zero());
    for cj in c.iter().skip(1).rev() {
        let b0 = &(&Polynomial::constant(cj.clone()) + &(&two_u * &b1)) - &b2;
        b2 = b1;
        b1 = b0;
    }
    let c0 = c
        .first()
        .cloned()
        .map(Polynomial::constant)
        .unwrap_or_default();
    &(&c0 + &(&u * &b1)) - &b2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::parse_function;
    use num_traits::Signed;

    fn opts() -> ProxyOptions {
        ProxyOptions {
            max_degree: 512,
            check_grid: 2000,
        }
    }

    #[test]
    fn reproduces_low_degree_polynomials() {
        let f = parse_function("3*x^5 - x^2 + 0.5").unwrap();
        let r = chebyshev_proxy_with(&f, (-2.0, 3.0), 1e-9, &opts()).unwrap();
        assert_eq!(r.degree, 8);
        for i in 0..=50 {
            let x = -2.0 + 5.0 * i as f64 / 50.0;
            let want = f.eval(x).unwrap();
            assert!((r.polynomial.eval_f64(x) - want).abs() < 1e-9 * want.abs().max(1.0));
        }
    }

    #[test]
    fn exp_converges_quickly() {
        let f = parse_function("exp(x)").unwrap();
        let r = chebyshev_proxy_with(&f, (0.0, 1.0), 1e-6, &opts()).unwrap();
        assert!(r.degree <= 16);
        assert!(r.check_error <= 1e-6);
    }

    #[test]
    fn abs_needs_higher_degree() {
        let f = parse_function("abs(x)").unwrap();
        let r = chebyshev_proxy_with(&f, (-1.0, 1.0), 1e-2, &opts()).unwrap();
        assert!(r.degree > 16);
        assert!(r.check_error <= 1e-2);
        // the exact polynomial agrees with the float check
        for i in -20..=20 {
            let x = ExactScalar::new(i.into(), 20.into());
            let err = crate::algebra::to_f64(&(r.polynomial.eval(&x) - x.abs()));
            assert!(err.abs() <= 1e-2 + 1e-9);
        }
    }

    #[test]
    fn cap_reports_best_error() {
        let f = parse_function("abs(x)").unwrap();
        let capped = ProxyOptions {
            max_degree: 16,
            check_grid: 2000,
        };
        match chebyshev_proxy_with(&f, (-1.0, 1.0), 1e-6, &capped) {
            Err(ApproxError::ToleranceUnreachable {
                best_error,
                best_degree,
                max_degree: 16,
                ..
            }) => {
                assert!(best_error > 1e-6);
                assert!(best_degree <= 16);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        let f = parse_function("x").unwrap();
        assert!(chebyshev_proxy(&f, (0.0, 1.0), 0.0).is_err());
        assert!(chebyshev_proxy(&f, (0.0, 1.0), f64::NAN).is_err());
    }

    #[test]
    fn zero_function_gives_zero_polynomial() {
        let f = parse_function("0").unwrap();
        assert!(chebyshev_proxy(&f, (0.0, 1.0), 1e-12).unwrap().is_zero());
    }

    #[test]
    fn clenshaw_matches_direct_sum() {
        let c = [0.5, -1.0, 0.25, 2.0];
        for t in [-1.0, -0.3, 0.0, 0.8, 1.0] {
            let direct: f64 = c
                .iter()
                .enumerate()
                .map(|(j, cj)| cj * (j as f64 * f64::acos(t)).cos())
                .sum();
            assert!((clenshaw(&c, t) - direct).abs() < 1e-14);
        }
    }
}
