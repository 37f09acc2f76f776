//! End-to-end approximation by Poisson kernel translates.
//!
//! A target `f` is first replaced by a polynomial `p` (Chebyshev interpolation,
//! skipped when `f` already is a polynomial), `p` is rewritten in the A-basis,
//! and the A-basis coordinates are matched by a combination of far-right
//! translates `b_m/(α² + (x − x_m)²)`. The error of that last step decays like
//! `1/x_1`, so the pipeline doubles the selection threshold until a dense-grid
//! check passes.

mod file;
mod measure;
mod pipeline;
mod proxy;

use num_traits::Zero;
use thiserror::Error;

use crate::algebra::{from_f64, to_f64, ExactScalar};
use crate::coeffs::{CoeffError, CoefficientVector};
use crate::funcspec::EvalError;
use crate::kernel::{KernelError, KernelParams};
use crate::nodes::NodesError;

pub use file::{
    approximant_from_json, approximant_to_json, read_approximant, write_approximant, RunMeta,
};
pub use measure::{
    grid_points, measure_error, measure_polynomial_error, ErrorReport, NormExponent, DEFAULT_GRID,
};
pub use pipeline::{
    approximate_function, approximate_polynomial, build_at_threshold, fit_function, fit_polynomial,
    initial_threshold, FunctionFit, PipelineOptions, PolynomialFit, Round,
};
pub use proxy::{chebyshev_proxy, chebyshev_proxy_with, ProxyOptions, ProxyResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApproxError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("tolerance {tol} unreachable up to degree {max_degree}; best grid error {best_error} at degree {best_degree}")]
    ToleranceUnreachable {
        tol: f64,
        max_degree: usize,
        best_error: f64,
        best_degree: usize,
    },
    #[error("{source}; best attempt: {}", describe_best(.best))]
    WindowExhausted {
        #[source]
        source: NodesError,
        /// `(threshold, measured sup error)` of the last successful round.
        best: Option<(f64, f64)>,
    },
    #[error("final check failed: measured error {measured} exceeds {eps}")]
    Inconsistent { measured: f64, eps: f64 },
    #[error("malformed approximant file: {0}")]
    BadFile(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Coeff(CoeffError),
    #[error(transparent)]
    Nodes(NodesError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn describe_best(best: &Option<(f64, f64)>) -> String {
    match best {
        Some((t, e)) => format!("threshold {t} gave sup error {e}"),
        None => "no threshold could be tried".to_string(),
    }
}

impl From<NodesError> for ApproxError {
    fn from(e: NodesError) -> Self {
        match e {
            NodesError::WindowExhausted { .. } => ApproxError::WindowExhausted {
                source: e,
                best: None,
            },
            other => ApproxError::Nodes(other),
        }
    }
}

impl From<CoeffError> for ApproxError {
    fn from(e: CoeffError) -> Self {
        match e {
            CoeffError::Nodes(n) => n.into(),
            other => ApproxError::Coeff(other),
        }
    }
}

/// One translate `coeff / (α² + (x − node)²)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub node: ExactScalar,
    pub coeff: ExactScalar,
}

/// `Σ_m b_m / (α² + (x − x_m)²)` built for an interval `[a, b]`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelApproximant {
    params: KernelParams,
    alpha_sq: ExactScalar,
    terms: Vec<Term>,
    interval: (f64, f64),
    certified_bound: Option<f64>,
}

impl KernelApproximant {
    /// Nodes must increase strictly and lie to the right of the interval.
    pub fn new(
        params: KernelParams,
        terms: Vec<Term>,
        interval: (f64, f64),
        certified_bound: Option<f64>,
    ) -> Result<Self, ApproxError> {
        let alpha_sq = params.exact_alpha_sq()?.clone();
        check_interval(interval)?;
        let right = from_f64(interval.1);
        for (i, t) in terms.iter().enumerate() {
            if t.node <= right {
                return Err(ApproxError::InvalidArgument(format!(
                    "node {} does not lie right of the interval end {}",
                    t.node, interval.1
                )));
            }
            if i > 0 && terms[i - 1].node >= t.node {
                return Err(ApproxError::InvalidArgument(
                    "nodes must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self {
            params,
            alpha_sq,
            terms,
            interval,
            certified_bound,
        })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    pub fn alpha_sq(&self) -> &ExactScalar {
        &self.alpha_sq
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn certified_bound(&self) -> Option<f64> {
        self.certified_bound
    }

    pub fn nodes(&self) -> Vec<ExactScalar> {
        self.terms.iter().map(|t| t.node.clone()).collect()
    }

    pub fn coefficients(&self) -> CoefficientVector {
        CoefficientVector {
            values: self.terms.iter().map(|t| t.coeff.clone()).collect(),
        }
    }

    /// Same sums with a different recorded bound.
    pub fn with_certified_bound(mut self, bound: Option<f64>) -> Self {
        self.certified_bound = bound;
        self
    }

    /// Exact value at a rational point.
    pub fn eval_exact(&self, x: &ExactScalar) -> ExactScalar {
        let mut sum = ExactScalar::zero();
        for t in &self.terms {
            let d = x - &t.node;
            sum += &t.coeff / (&self.alpha_sq + &d * &d);
        }
        sum
    }

    /// Value at `x`, computed exactly and rounded once.
    pub fn eval(&self, x: f64) -> f64 {
        to_f64(&self.eval_exact(&from_f64(x)))
    }

    /// Plain floating-point summation with rounded coefficients. Loses
    /// roughly `log10(max |b_m| / x_m²)` digits to cancellation.
    pub fn eval_float(&self, x: f64) -> f64 {
        let a2 = self.params.alpha_sq_f64();
        self.terms
            .iter()
            .map(|t| {
                let d = x - to_f64(&t.node);
                to_f64(&t.coeff) / (a2 + d * d)
            })
            .sum()
    }
}

pub(crate) fn check_interval(interval: (f64, f64)) -> Result<(), ApproxError> {
    let (a, b) = interval;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(ApproxError::InvalidArgument(format!(
            "interval [{a}, {b}] must satisfy a < b"
        )));
    }
    Ok(())
}
