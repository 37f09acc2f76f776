use num_traits::Zero;

use super::measure::{measure_error, measure_polynomial_error, NormExponent, DEFAULT_GRID};
use super::proxy::{chebyshev_proxy_with, ProxyOptions, ProxyResult};
use super::{check_interval, ApproxError, KernelApproximant, Term};
use crate::algebra::{
    from_f64, int, monomial_to_abasis, to_f64, ABasisExpansion, ExactScalar, Polynomial,
};
use crate::coeffs::{
    approximation_tail_bound, combine_for_polynomial_with, CoeffError, Combination,
};
use crate::funcspec::FunctionSpec;
use crate::kernel::KernelParams;
use crate::nodes::{NodesError, ScatteredSequence};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    /// Intervals of the acceptance grid.
    pub grid: usize,
    pub combination: Combination,
    pub proxy: ProxyOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            grid: DEFAULT_GRID,
            combination: Combination::default(),
            proxy: ProxyOptions::default(),
        }
    }
}

/// One attempt at a fixed threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct Round {
    pub threshold: ExactScalar,
    pub approximant: KernelApproximant,
    /// Grid sup error against the polynomial target.
    pub measured: f64,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialFit {
    /// Every threshold tried, in order; the last one succeeded.
    pub rounds: Vec<Round>,
}

impl PolynomialFit {
    pub fn last(&self) -> &Round {
        self.rounds.last().expect("a fit has at least one round")
    }

    pub fn into_approximant(mut self) -> KernelApproximant {
        self.rounds
            .pop()
            .expect("a fit has at least one round")
            .approximant
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionFit {
    /// Absent when the target already is a polynomial.
    pub proxy: Option<ProxyResult>,
    pub fit: PolynomialFit,
    /// Grid sup error against the original target.
    pub measured: f64,
}

impl FunctionFit {
    pub fn approximant(&self) -> &KernelApproximant {
        &self.fit.last().approximant
    }
}

fn check_eps(eps: f64) -> Result<(), ApproxError> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(ApproxError::InvalidArgument(format!(
            "eps must be positive and finite, got {eps}"
        )))
    }
}

/// `max(2·s, smallest node > b)` with `s = sqrt(max(|a|,|b|)² + α²)`.
pub fn initial_threshold(
    seq: &ScatteredSequence,
    interval: (f64, f64),
    params: &KernelParams,
) -> Result<ExactScalar, ApproxError> {
    check_interval(interval)?;
    let s = params.growth_radius(interval.0.abs().max(interval.1.abs()));
    let floor = from_f64(2.0 * s);
    let Some(i) = seq.first_above(&from_f64(interval.1)) else {
        return Err(NodesError::WindowExhausted {
            requested: 1,
            reachable: 0,
            threshold: interval.1.to_string(),
        }
        .into());
    };
    let first = seq.node(i).expect("index in range");
    Ok(if first > floor { first } else { floor })
}

/// Builds, bounds and measures the approximant of `p` from doubling nodes
/// starting at `threshold`.
pub fn build_at_threshold(
    p: &Polynomial,
    expansion: &ABasisExpansion,
    seq: &ScatteredSequence,
    interval: (f64, f64),
    params: &KernelParams,
    threshold: &ExactScalar,
    opts: &PipelineOptions,
) -> Result<Round, ApproxError> {
    let (b, sel) = combine_for_polynomial_with(expansion, seq, threshold, opts.combination)?;
    let bound = match approximation_tail_bound(&sel, &b, expansion, interval, params) {
        Ok(v) if v.is_finite() => Some(v),
        Ok(_) | Err(CoeffError::NotCertified { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    let terms = sel
        .nodes()
        .into_iter()
        .zip(b.values)
        .map(|(node, coeff)| Term { node, coeff })
        .collect();
    let approximant = KernelApproximant::new(params.clone(), terms, interval, bound)?;
    let measured = measure_polynomial_error(
        p,
        &approximant,
        interval,
        opts.grid,
        &[NormExponent::Infinity],
    )?
    .sup_estimate;
    Ok(Round {
        threshold: threshold.clone(),
        approximant,
        measured,
        bound,
    })
}

/// Doubles the threshold from [`initial_threshold`] until the grid sup error
/// is at most `eps`.
pub fn fit_polynomial(
    p: &Polynomial,
    seq: &ScatteredSequence,
    interval: (f64, f64),
    params: &KernelParams,
    eps: f64,
    opts: &PipelineOptions,
) -> Result<PolynomialFit, ApproxError> {
    check_eps(eps)?;
    check_interval(interval)?;
    let alpha_sq = params.exact_alpha_sq()?;
    let expansion = monomial_to_abasis(p, alpha_sq);
    if expansion.coeffs.is_empty() {
        let approximant = KernelApproximant::new(params.clone(), Vec::new(), interval, Some(0.0))?;
        return Ok(PolynomialFit {
            rounds: vec![Round {
                threshold: ExactScalar::zero(),
                approximant,
                measured: 0.0,
                bound: Some(0.0),
            }],
        });
    }
    let mut threshold = initial_threshold(seq, interval, params)?;
    let mut rounds: Vec<Round> = Vec::new();
    loop {
        match build_at_threshold(p, &expansion, seq, interval, params, &threshold, opts) {
            Ok(round) => {
                let done = round.measured <= eps;
                rounds.push(round);
                if done {
                    return Ok(PolynomialFit { rounds });
                }
            }
            Err(ApproxError::WindowExhausted { source, .. }) => {
                let best = rounds
                    .iter()
                    .min_by(|x, y| x.measured.total_cmp(&y.measured))
                    .map(|r| (to_f64(&r.threshold), r.measured));
                return Err(ApproxError::WindowExhausted { source, best });
            }
            Err(e) => return Err(e),
        }
        threshold *= int(2);
    }
}

pub fn approximate_polynomial(
    p: &Polynomial,
    seq: &ScatteredSequence,
    interval: (f64, f64),
    params: &KernelParams,
    eps: f64,
) -> Result<KernelApproximant, ApproxError> {
    fit_polynomial(p, seq, interval, params, eps, &PipelineOptions::default())
        .map(PolynomialFit::into_approximant)
}

/// Proxy at `eps/2`, kernel fit of the proxy at `eps/2`, then a grid check of
/// the full error against `eps`. Polynomial targets skip the proxy and are
/// fitted at `eps` directly.
pub fn fit_function(
    f: &FunctionSpec,
    seq: &ScatteredSequence,
    interval: (f64, f64),
    params: &KernelParams,
    eps: f64,
    opts: &PipelineOptions,
) -> Result<FunctionFit, ApproxError> {
    check_eps(eps)?;
    check_interval(interval)?;
    let (proxy, fit) = match f.to_polynomial() {
        Some(p) => (None, fit_polynomial(&p, seq, interval, params, eps, opts)?),
        None => {
            let proxy = chebyshev_proxy_with(f, interval, eps / 2.0, &opts.proxy)?;
            let mut fit =
                fit_polynomial(&proxy.polynomial, seq, interval, params, eps / 2.0, opts)?;
            // the tail bound covers the proxy only, not the target
            let last = fit.rounds.last_mut().expect("a fit has at least one round");
            last.approximant = last.approximant.clone().with_certified_bound(None);
            (Some(proxy), fit)
        }
    };
    let measured = measure_error(
        f,
        &fit.last().approximant,
        interval,
        opts.grid,
        &[NormExponent::Infinity],
    )?
    .sup_estimate;
    if measured > eps {
        return Err(ApproxError::Inconsistent { measured, eps });
    }
    Ok(FunctionFit {
        proxy,
        fit,
        measured,
    })
}

pub fn approximate_function(
    f: &FunctionSpec,
    seq: &ScatteredSequence,
    interval: (f64, f64),
    params: &KernelParams,
    eps: f64,
) -> Result<KernelApproximant, ApproxError> {
    fit_function(f, seq, interval, params, eps, &PipelineOptions::default())
        .map(|r| r.fit.into_approximant())
}
