//! Inverse-node Vandermonde systems and kernel coefficients.
//!
//! For nodes `x_1 < … < x_N` the system matrix is `P_N[l][k] = x_k^{−(l+1)}`,
//! `l, k = 1..N`. Writing `y_k = 1/x_k`, `P_N = V·diag(y_k²)` with `V` the
//! ordinary Vandermonde matrix in the `y_k`, so every solve reduces to
//! Lagrange basis coefficients.
//!
//! The solution of `P_N b = e_N` has the closed form
//!
//! ```text
//! b_m = x_m^{N+1} · Π_{k≠m} (1 − x_m/x_k)^{−1}
//! ```
//!
//! A variant of this formula with an extra `(−1)^{N+m}`
//! prefactor does not solve the system (at `N = 2`, nodes
//! `(10, 20)` it gives `(−2000, −8000)` against the true `(2000, −8000)`); the
//! sign is already carried by the factors with `k < m`. It is kept here as
//! [`signed_prefactor_coeffs`] so tests can demonstrate the discrepancy.

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::algebra::{to_f64, ABasisExpansion, ExactScalar};
use crate::kernel::{truncation_error_bound, KernelError, KernelParams};
use crate::nodes::{select_subsequence, NodesError, ScatteredSequence, SubsequenceSelection};

/// Upper bound for `Π_{i≥1} (1 − 2^{−i})^{−1} ≈ 3.46275`, the decay constant on
/// doubling nodes.
pub const DECAY_CONSTANT: f64 = 3.4628;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoeffError {
    #[error("system needs at least one node")]
    Empty,
    #[error("node {0} is not positive")]
    NonPositiveNode(String),
    #[error("singular system: node {0} is repeated")]
    RepeatedNode(String),
    #[error("closed-form coefficients failed the exact residual check")]
    InconsistentSolution,
    #[error("cannot certify: first node {first} must exceed 2*s_max = {limit}")]
    NotCertified { first: f64, limit: f64 },
    #[error(transparent)]
    Nodes(#[from] NodesError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

/// `P_N` over a fixed node set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VandermondeSystem {
    nodes: Vec<ExactScalar>,
}

impl VandermondeSystem {
    pub fn new(nodes: Vec<ExactScalar>) -> Result<Self, CoeffError> {
        if nodes.is_empty() {
            return Err(CoeffError::Empty);
        }
        if let Some(x) = nodes.iter().find(|x| !x.is_positive()) {
            return Err(CoeffError::NonPositiveNode(x.to_string()));
        }
        for (i, x) in nodes.iter().enumerate() {
            if nodes[..i].contains(x) {
                return Err(CoeffError::RepeatedNode(x.to_string()));
            }
        }
        Ok(Self { nodes })
    }

    pub fn from_selection(sel: &SubsequenceSelection) -> Result<Self, CoeffError> {
        Self::new(sel.nodes())
    }

    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[ExactScalar] {
        &self.nodes
    }

    /// Entry `(l, k)`, both 1-based: `x_k^{−(l+1)}`.
    pub fn entry(&self, l: usize, k: usize) -> ExactScalar {
        num_traits::pow(self.nodes[k - 1].recip(), l + 1)
    }

    /// Dense copy of the matrix, row `l−1` holding power `−(l+1)`.
    pub fn matrix(&self) -> Vec<Vec<ExactScalar>> {
        let n = self.size();
        (1..=n)
            .map(|l| (1..=n).map(|k| self.entry(l, k)).collect())
            .collect()
    }
}

/// Coefficients attached to the nodes of a system, entry `m` to node `x_m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientVector {
    pub values: Vec<ExactScalar>,
}

impl CoefficientVector {
    pub fn system_size(&self) -> usize {
        self.values.len()
    }
}

/// `det P_N = Π x_k^{−2} · Π_{r<s} (1/x_s − 1/x_r)`.
pub fn vandermonde_det(sys: &VandermondeSystem) -> ExactScalar {
    let inv: Vec<ExactScalar> = sys.nodes.iter().map(|x| x.recip()).collect();
    let mut det: ExactScalar = inv.iter().map(|y| y * y).product();
    for s in 0..inv.len() {
        for r in 0..s {
            det *= &inv[s] - &inv[r];
        }
    }
    det
}

/// Exact solution of `P_N b = e_N` through the product closed form, checked
/// against the system before it is returned.
pub fn unit_target_coeffs(sys: &VandermondeSystem) -> Result<CoefficientVector, CoeffError> {
    let b = unit_target_closed_form(&sys.nodes);
    if !residual_check(sys, &b).is_zero() {
        return Err(CoeffError::InconsistentSolution);
    }
    Ok(b)
}

fn unit_target_closed_form(nodes: &[ExactScalar]) -> CoefficientVector {
    let n = nodes.len();
    let values = nodes
        .iter()
        .enumerate()
        .map(|(m, xm)| {
            let denom: ExactScalar = nodes
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != m)
                .map(|(_, xk)| ExactScalar::one() - xm / xk)
                .product();
            num_traits::pow(xm.clone(), n + 1) / denom
        })
        .collect();
    CoefficientVector { values }
}

/// The closed form with the additional `(−1)^{N+m}` factor. It does not solve
/// `P_N b = e_N` for `N ≥ 2`; see the module docs.
pub fn signed_prefactor_coeffs(sys: &VandermondeSystem) -> CoefficientVector {
    let n = sys.size();
    let mut b = unit_target_closed_form(&sys.nodes);
    for (i, v) in b.values.iter_mut().enumerate() {
        let m = i + 1;
        if (n + m) % 2 == 1 {
            *v = -v.clone();
        }
    }
    b
}

/// `max_l |Σ_m b_m x_m^{−(l+1)} − δ_{lN}|`, exact.
///
/// # Panics
/// Panics if `b` and the system differ in size.
pub fn residual_check(sys: &VandermondeSystem, b: &CoefficientVector) -> ExactScalar {
    let n = sys.size();
    assert_eq!(
        b.values.len(),
        n,
        "coefficient vector does not match system size"
    );
    let mut worst = ExactScalar::zero();
    let mut powers: Vec<ExactScalar> = sys.nodes.iter().map(|x| x.recip()).collect();
    let inv: Vec<ExactScalar> = powers.clone();
    for l in 1..=n {
        // powers[k] = x_k^{−(l+1)}
        for (p, y) in powers.iter_mut().zip(&inv) {
            *p *= y;
        }
        let mut row: ExactScalar = b.values.iter().zip(&powers).map(|(bm, p)| bm * p).sum();
        if l == n {
            row -= ExactScalar::one();
        }
        let row = row.abs();
        if row > worst {
            worst = row;
        }
    }
    worst
}

/// `max_m |b_m| · x_m^{−(N+2)}`, which stays below `DECAY_CONSTANT / x_1` on
/// doubling nodes.
pub fn coefficient_decay(sel: &SubsequenceSelection, b: &CoefficientVector) -> f64 {
    let n = b.values.len();
    sel.picked
        .iter()
        .zip(&b.values)
        .map(|((_, x), bm)| to_f64(&(bm.abs() / num_traits::pow(x.clone(), n + 2))))
        .fold(0.0, f64::max)
}

/// `μ_n = Σ_m b_m x_m^{−(n+2)}` for `n = 0..count`.
///
/// These are the coefficients of `A_n` when the kernel sum is expanded in
/// powers of `1/x_m`.
pub fn moments(nodes: &[ExactScalar], b: &CoefficientVector, count: usize) -> Vec<ExactScalar> {
    let inv: Vec<ExactScalar> = nodes.iter().map(|x| x.recip()).collect();
    let mut powers: Vec<ExactScalar> = inv.iter().map(|y| y * y).collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(b.values.iter().zip(&powers).map(|(bm, p)| bm * p).sum());
        for (p, y) in powers.iter_mut().zip(&inv) {
            *p *= y;
        }
    }
    out
}

/// Solves `P_N b = target` exactly (`target[n]` is the right-hand side of row
/// `n + 1`) through Lagrange basis coefficients in `y = 1/x`.
pub fn solve_moment_system(sys: &VandermondeSystem, target: &[ExactScalar]) -> CoefficientVector {
    let n = sys.size();
    assert!(target.len() <= n, "more targets than nodes");
    let ys: Vec<ExactScalar> = sys.nodes.iter().map(|x| x.recip()).collect();
    // master(y) = Π (y − y_j), low-to-high coefficients
    let mut master = vec![ExactScalar::one()];
    for yj in &ys {
        let mut next = vec![ExactScalar::zero(); master.len() + 1];
        for (i, c) in master.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * yj;
        }
        master = next;
    }
    let values = ys
        .iter()
        .zip(&sys.nodes)
        .map(|(ym, xm)| {
            // quotient master(y)/(y − y_m) by synthetic division from the top
            let mut quotient = vec![ExactScalar::zero(); n];
            let mut carry = ExactScalar::zero();
            for i in (0..n).rev() {
                carry = &master[i + 1] + &carry * ym;
                quotient[i] = carry.clone();
            }
            let denom = quotient
                .iter()
                .rev()
                .fold(ExactScalar::zero(), |acc, c| acc * ym + c);
            let weight: ExactScalar = target.iter().zip(&quotient).map(|(t, q)| t * q).sum();
            weight / denom * xm * xm
        })
        .collect();
    CoefficientVector { values }
}

/// How the per-degree coefficient vectors are combined for a polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Combination {
    /// One `(d+1)`-node system with right-hand side `(c_0, …, c_d)`. The kernel
    /// sum then reproduces every A-basis coordinate exactly:
    /// `Σ_m b_m x_m^{−(n+2)} = c_n` for `n ≤ d`.
    #[default]
    FullSystem,
    /// `b_m = Σ_{k≥m} c_{k−1} b_k(m)` with `b_k` the unit-target solution on the
    /// first `k` nodes. Lower-degree pieces leak into higher moments at
    /// `O(1/x_1)`.
    NestedPrefix,
}

/// Combined coefficients for `Σ c_k A_k` on an existing selection of `d+1`
/// nodes.
pub fn combine_on_selection(
    expansion: &ABasisExpansion,
    sel: &SubsequenceSelection,
    combination: Combination,
) -> Result<CoefficientVector, CoeffError> {
    let d1 = expansion.coeffs.len();
    if d1 == 0 {
        return Ok(CoefficientVector { values: Vec::new() });
    }
    let nodes = sel.nodes();
    assert_eq!(nodes.len(), d1, "selection must hold deg + 1 nodes");
    match combination {
        Combination::FullSystem => {
            let sys = VandermondeSystem::new(nodes)?;
            Ok(solve_moment_system(&sys, &expansion.coeffs))
        }
        Combination::NestedPrefix => {
            let mut values = vec![ExactScalar::zero(); d1];
            for k in 1..=d1 {
                let c = &expansion.coeffs[k - 1];
                if c.is_zero() {
                    continue;
                }
                let sys = VandermondeSystem::new(nodes[..k].to_vec())?;
                let bk = unit_target_coeffs(&sys)?;
                for (v, bkm) in values.iter_mut().zip(&bk.values) {
                    *v += c * bkm;
                }
            }
            Ok(CoefficientVector { values })
        }
    }
}

/// Selects `deg + 1` doubling nodes past `threshold` and combines with
/// [`Combination::FullSystem`].
pub fn combine_for_polynomial(
    expansion: &ABasisExpansion,
    seq: &ScatteredSequence,
    threshold: &ExactScalar,
) -> Result<(CoefficientVector, SubsequenceSelection), CoeffError> {
    combine_for_polynomial_with(expansion, seq, threshold, Combination::FullSystem)
}

pub fn combine_for_polynomial_with(
    expansion: &ABasisExpansion,
    seq: &ScatteredSequence,
    threshold: &ExactScalar,
    combination: Combination,
) -> Result<(CoefficientVector, SubsequenceSelection), CoeffError> {
    let count = expansion.coeffs.len();
    if count == 0 {
        let sel = SubsequenceSelection {
            picked: Vec::new(),
            start_threshold: threshold.clone(),
        };
        return Ok((CoefficientVector { values: Vec::new() }, sel));
    }
    let sel = select_subsequence(seq, threshold, count)?;
    let b = combine_on_selection(expansion, &sel, combination)?;
    Ok((b, sel))
}

/// Certified bound on `sup_{[a,b]} |Σ_m b_m/(α² + (x − x_m)²) − p(x)|`.
///
/// Expanding each translate in powers of `1/x_m` gives
/// `Σ_{n≤d} (μ_n − c_n)·A_n(x) + Σ_m b_m·R_m(x)` with `R_m` the kernel tail
/// after `d+1` terms, so the bound is
/// `Σ_n |μ_n − c_n|·(n+1)·s^n + Σ_m |b_m|·tail(x_m, d+1)`. The first sum is
/// zero for [`Combination::FullSystem`].
pub fn approximation_tail_bound(
    sel: &SubsequenceSelection,
    b: &CoefficientVector,
    expansion: &ABasisExpansion,
    interval: (f64, f64),
    params: &KernelParams,
) -> Result<f64, CoeffError> {
    let d1 = expansion.coeffs.len();
    if d1 == 0 {
        return Ok(0.0);
    }
    let x_abs_max = interval.0.abs().max(interval.1.abs());
    let s = params.growth_radius(x_abs_max);
    let first = to_f64(sel.first().expect("nonempty selection"));
    if first.is_nan() || first <= 2.0 * s {
        return Err(CoeffError::NotCertified {
            first,
            limit: 2.0 * s,
        });
    }
    let nodes = sel.nodes();
    let mu = moments(&nodes, b, d1);
    let mut bound = 0.0;
    for (n, (m, c)) in mu.iter().zip(&expansion.coeffs).enumerate() {
        let gap = (m - c).abs();
        if !gap.is_zero() {
            bound += to_f64(&gap) * (n as f64 + 1.0) * s.powi(n as i32);
        }
    }
    for (bm, x) in b.values.iter().zip(&nodes) {
        bound += to_f64(&bm.abs()) * truncation_error_bound(params, x_abs_max, to_f64(x), d1)?;
    }
    Ok(bound * (1.0 + 1e-12))
}

/// `K = Π_{i=1}^{terms} (1 − 2^{−i})^{−1}`; increases to about 3.46275.
pub fn decay_constant_partial(terms: usize) -> f64 {
    (1..=terms)
        .map(|i| 1.0 / (1.0 - 0.5f64.powi(i as i32)))
        .product()
}
