//! Acceptance checks. Each test prints one `PASS`/`FAIL` line and then
//! asserts on the same condition.

use std::process::Command;
use std::time::{Duration, Instant};

use num_traits::{Signed, Zero};
use poisson_translates::algebra::monomial_to_abasis;
use poisson_translates::algebra::{
    a_basis_eval_closed, a_basis_table, from_f64, int, to_f64, ExactScalar, Polynomial,
};
use poisson_translates::approx::{
    approximant_to_json, build_at_threshold, fit_function, measure_error, read_approximant,
    ErrorReport, NormExponent, PipelineOptions,
};
use poisson_translates::coeffs::{
    coefficient_decay, combine_for_polynomial, moments, residual_check, signed_prefactor_coeffs,
    unit_target_coeffs, VandermondeSystem, DECAY_CONSTANT,
};
use poisson_translates::funcspec::parse_function;
use poisson_translates::kernel::{series_residual_exact, truncation_error_bound, KernelParams};
use poisson_translates::nodes::{
    select_subsequence, validate_scattered, NodesError, ScatteredSequence,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, title: &str, ok: bool, detail: &str) {
    println!(
        "{} [{id}] {title}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "[{id}] {title}: {detail}");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn q(n: i64, d: i64) -> ExactScalar {
    ExactScalar::new(n.into(), d.into())
}

#[test]
fn basis_degree_and_leading_coefficient() {
    let start = Instant::now();
    let mut bad = Vec::new();
    for a2 in [q(1, 4), int(1), int(4), q(7, 3)] {
        for (n, p) in a_basis_table(100, &a2).iter().enumerate() {
            if p.degree() != Some(n) || p.leading_coeff() != Some(&int(n as i64 + 1)) {
                bad.push((a2.to_string(), n));
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        "A_n has degree n and leading coefficient n+1 for n <= 100",
        bad.is_empty() && elapsed < Duration::from_secs(5),
        &format!("{} violations, {:.2?}", bad.len(), elapsed),
    );
}

#[test]
fn recursion_matches_chebyshev_closed_form() {
    let alphas = [(q(1, 4), 0.5), (int(1), 1.0), (int(4), 2.0)];
    let tables: Vec<Vec<Polynomial>> = alphas.iter().map(|(a2, _)| a_basis_table(60, a2)).collect();
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let which = r.gen_range(0..3);
        let n = r.gen_range(0..=60);
        let x: f64 = r.gen_range(-5.0..=5.0);
        let recursion = to_f64(&tables[which][n].eval(&from_f64(x)));
        let closed = a_basis_eval_closed(n, alphas[which].1, x);
        worst = worst.max((recursion - closed).abs() / (1.0 + closed.abs()));
    }
    verdict(
        2,
        "recursion agrees with the closed form on 10000 samples",
        worst <= 1e-9,
        &format!("worst scaled difference {worst:e}"),
    );
}

/// Plain Gauss-Jordan elimination over the rationals.
fn eliminate(mut a: Vec<Vec<ExactScalar>>, mut rhs: Vec<ExactScalar>) -> Vec<ExactScalar> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n).find(|&r| !a[r][c].is_zero()).expect("nonsingular");
        a.swap(c, p);
        rhs.swap(c, p);
        for r in 0..n {
            if r != c && !a[r][c].is_zero() {
                let f = &a[r][c] / &a[c][c];
                let pivot = a[c].clone();
                for (x, p) in a[r].iter_mut().zip(&pivot).skip(c) {
                    *x -= &f * p;
                }
                let v = &f * &rhs[c];
                rhs[r] -= v;
            }
        }
    }
    (0..n).map(|i| &rhs[i] / &a[i][i]).collect()
}

fn random_window(r: &mut ChaCha8Rng) -> ScatteredSequence {
    if r.gen_bool(0.5) {
        let lo = r.gen_range(-100..50);
        return ScatteredSequence::integers(lo, lo + r.gen_range(1_000_000..50_000_000)).unwrap();
    }
    let mut nodes = Vec::new();
    let mut x: i64 = r.gen_range(-50..10);
    while x < 20_000_000 {
        nodes.push(int(x));
        x += r.gen_range(1..=(x.abs() / 3 + 2));
    }
    validate_scattered(&nodes).unwrap()
}

#[test]
fn unit_target_solve_is_exact() {
    let mut r = rng(3);
    let (mut checked, mut residual_bad, mut mismatch) = (0, 0, 0);
    while checked < 300 {
        let seq = random_window(&mut r);
        let t = int(r.gen_range(1..3000));
        let n = r.gen_range(1..=12);
        let sel = match select_subsequence(&seq, &t, n) {
            Ok(sel) => sel,
            Err(NodesError::WindowExhausted { .. }) => continue,
            Err(e) => panic!("{e}"),
        };
        let sys = VandermondeSystem::from_selection(&sel).unwrap();
        let b = unit_target_coeffs(&sys).unwrap();
        if !residual_check(&sys, &b).is_zero() {
            residual_bad += 1;
        }
        let mut rhs = vec![ExactScalar::zero(); n];
        rhs[n - 1] = int(1);
        if eliminate(sys.matrix(), rhs) != b.values {
            mismatch += 1;
        }
        checked += 1;
    }
    verdict(
        3,
        "closed form is an exact solution and equals elimination",
        residual_bad == 0 && mismatch == 0,
        &format!("{checked} selections, {residual_bad} nonzero residuals, {mismatch} mismatches"),
    );
}

#[test]
fn signed_prefactor_variant_fails() {
    let sys = VandermondeSystem::new(vec![int(10), int(20)]).unwrap();
    let b = unit_target_coeffs(&sys).unwrap();
    let signed = signed_prefactor_coeffs(&sys);
    let exact = b.values == vec![int(2000), int(-8000)];
    let residual_ok = residual_check(&sys, &b).is_zero();
    let signed_wrong = signed.values == vec![int(-2000), int(-8000)]
        && residual_check(&sys, &signed).is_positive();
    verdict(
        4,
        "nodes (10, 20): solve gives (2000, -8000); the (-1)^(N+m) variant fails",
        exact && residual_ok && signed_wrong,
        &format!(
            "solve {:?}, variant {:?}, variant residual {}",
            b.values.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            signed
                .values
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>(),
            residual_check(&sys, &signed)
        ),
    );
}

#[test]
fn coefficient_decay_constant() {
    let mut r = rng(5);
    let (mut checked, mut worst) = (0, 0.0f64);
    while checked < 1000 {
        let seq = random_window(&mut r);
        let t = int(r.gen_range(1..5000));
        let n = r.gen_range(1..=12);
        let Ok(sel) = select_subsequence(&seq, &t, n) else {
            continue;
        };
        let sys = VandermondeSystem::from_selection(&sel).unwrap();
        let b = unit_target_coeffs(&sys).unwrap();
        let x1 = to_f64(sel.first().unwrap());
        worst = worst.max(coefficient_decay(&sel, &b) * x1);
        checked += 1;
    }
    verdict(
        5,
        "max_m |b_m| x_m^-(N+2) <= 3.4628 / x_1 on 1000 selections",
        worst <= DECAY_CONSTANT,
        &format!("worst x_1-scaled decay {worst:.6}"),
    );
}

struct SeriesCase {
    alpha_sq: ExactScalar,
    x_abs_max: ExactScalar,
    x: ExactScalar,
    t: ExactScalar,
    sigma: f64,
}

fn series_case(r: &mut ChaCha8Rng) -> SeriesCase {
    let alpha_sq = q(r.gen_range(1..=20), r.gen_range(1..=8));
    let x_abs_max = q(r.gen_range(0..=20), 4);
    let x = &x_abs_max * q(r.gen_range(-16..=16), 16);
    let s = (to_f64(&x_abs_max).powi(2) + to_f64(&alpha_sq)).sqrt();
    let mut t = q((2.0 * s * 8.0).ceil() as i64 + 1 + r.gen_range(0..200), 8);
    if r.gen_bool(0.3) {
        t = -t;
    }
    let sigma = s / to_f64(&t).abs();
    SeriesCase {
        alpha_sq,
        x_abs_max,
        x,
        t,
        sigma,
    }
}

#[test]
fn truncation_bound_dominates_exact_residual() {
    let mut r = rng(6);
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..10_000 {
        let c = series_case(&mut r);
        let n = r.gen_range(1..=30);
        let params = KernelParams::from_alpha_sq(c.alpha_sq.clone()).unwrap();
        let bound = truncation_error_bound(&params, to_f64(&c.x_abs_max), to_f64(&c.t), n).unwrap();
        let residual = to_f64(
            &series_residual_exact(&c.alpha_sq, &c.x, &c.t, n)
                .unwrap()
                .abs(),
        );
        if residual > bound {
            violations += 1;
        }
        if residual > 0.0 {
            tightest = tightest.min(bound / residual);
        }
    }
    verdict(
        6,
        "truncation bound >= exact residual on 10000 inputs",
        violations == 0,
        &format!("{violations} violations, smallest bound/residual {tightest:.4}"),
    );
}

#[test]
fn residual_ratio_per_term_tracks_sigma() {
    let mut r = rng(7);
    let (mut cases, mut violations, mut worst) = (0, 0, 0.0f64);
    for _ in 0..2_000 {
        let c = series_case(&mut r);
        let n = r.gen_range(5..=12);
        let r0 = series_residual_exact(&c.alpha_sq, &c.x, &c.t, n)
            .unwrap()
            .abs();
        if r0.is_zero() {
            continue;
        }
        let r1 = series_residual_exact(&c.alpha_sq, &c.x, &c.t, n + 1)
            .unwrap()
            .abs();
        let ratio = to_f64(&(r1 / r0));
        cases += 1;
        if ratio > c.sigma + 0.05 {
            violations += 1;
            worst = worst.max(ratio - c.sigma);
        }
    }
    verdict(
        6,
        "residual ratio per added term <= sigma + 0.05 for N >= 5",
        violations == 0,
        &format!("{violations} of {cases} cases exceed, worst ratio - sigma = {worst:.4}"),
    );
}

#[test]
fn combined_coefficients_reproduce_moments() {
    let mut r = rng(8);
    let seq = ScatteredSequence::integers(-1_000_000_000, 1_000_000_000).unwrap();
    let (mut checked, mut bad) = (0, 0);
    for _ in 0..200 {
        let deg = r.gen_range(0..=8);
        let coeffs: Vec<ExactScalar> = (0..=deg)
            .map(|_| q(r.gen_range(-50..=50), r.gen_range(1..=12)))
            .collect();
        let p = Polynomial::from_coeffs(coeffs);
        let a2 = q(r.gen_range(1..=9), r.gen_range(1..=4));
        let e = monomial_to_abasis(&p, &a2);
        let t = int(r.gen_range(3..2000));
        let (b, sel) = combine_for_polynomial(&e, &seq, &t).unwrap();
        if moments(&sel.nodes(), &b, e.coeffs.len()) != e.coeffs {
            bad += 1;
        }
        checked += 1;
    }
    verdict(
        7,
        "sum_m b_m x_m^-(n+2) = c_n exactly for degree <= 8",
        bad == 0,
        &format!("{checked} polynomials, {bad} mismatches"),
    );
}

#[test]
fn error_halves_with_threshold() {
    let start = Instant::now();
    let params = KernelParams::from_alpha_sq(int(1)).unwrap();
    let seq = ScatteredSequence::integers(-1_000_000_000, 1_000_000_000).unwrap();
    let p = Polynomial::x();
    let e = monomial_to_abasis(&p, &int(1));
    let opts = PipelineOptions::default();
    let measured = |t: i64| {
        build_at_threshold(&p, &e, &seq, (-1.0, 1.0), &params, &int(t), &opts)
            .unwrap()
            .measured
    };
    let mut ratios = Vec::new();
    for t in [40, 80, 160, 320] {
        ratios.push(measured(2 * t) / measured(t));
    }
    let elapsed = start.elapsed();
    let ok = ratios.iter().all(|r| *r <= 0.7) && elapsed < Duration::from_secs(30);
    verdict(
        8,
        "p = x: error(2T)/error(T) <= 0.7 for T in 40..320",
        ok,
        &format!("ratios {ratios:.4?}, {elapsed:.2?}"),
    );
}

fn end_to_end(id: u32, function: &str, interval: (f64, f64), eps: f64) {
    let start = Instant::now();
    let f = parse_function(function).unwrap();
    let params = KernelParams::from_alpha_sq(int(1)).unwrap();
    let seq = ScatteredSequence::integers(-1_000_000_000, 1_000_000_000).unwrap();
    let outcome = fit_function(
        &f,
        &seq,
        interval,
        &params,
        eps,
        &PipelineOptions::default(),
    )
    .and_then(|fit| {
        measure_error(
            &f,
            fit.approximant(),
            interval,
            5000,
            &[NormExponent::Infinity],
        )
        .map(|r| (r.sup_estimate, fit.approximant().terms().len()))
    });
    let elapsed = start.elapsed();
    let (ok, detail) = match outcome {
        Ok((sup, terms)) => (
            sup < eps && elapsed < Duration::from_secs(60),
            format!("{terms} terms, fresh-grid sup {sup:e}, {elapsed:.2?}"),
        ),
        Err(e) => (false, format!("{e} ({elapsed:.2?})")),
    };
    verdict(
        id,
        &format!("{function} on [{}, {}] to {eps}", interval.0, interval.1),
        ok,
        &detail,
    );
}

#[test]
fn end_to_end_exp() {
    end_to_end(9, "exp(x)", (0.0, 1.0), 1e-3);
}

#[test]
fn end_to_end_runge() {
    end_to_end(9, "1/(1+25*x^2)", (-1.0, 1.0), 1e-2);
}

fn holder_ok(r: &ErrorReport, width: f64) -> bool {
    r.lp_estimates.iter().all(|(p, v)| match p {
        NormExponent::Finite(p) => *v <= width.powf(1.0 / p) * r.sup_estimate * (1.0 + 1e-12),
        NormExponent::Infinity => *v == r.sup_estimate,
    })
}

#[test]
fn lp_norms_and_file_round_trip() {
    let norms = [
        NormExponent::Finite(1.0),
        NormExponent::Finite(2.0),
        NormExponent::Infinity,
    ];
    let params = KernelParams::from_alpha_sq(int(1)).unwrap();
    let seq = ScatteredSequence::integers(-1_000_000_000, 1_000_000_000).unwrap();
    let mut reports = 0;
    let mut holder_bad = 0;
    for (text, interval, eps) in [
        ("exp(x)", (0.0, 1.0), 1e-3),
        ("x^2 - x", (-1.0, 1.0), 1e-2),
        ("cos(x)", (-1.0, 1.0), 1e-3),
        ("x^3 - 2*x", (0.0, 2.0), 0.05),
    ] {
        let f = parse_function(text).unwrap();
        let fit = fit_function(
            &f,
            &seq,
            interval,
            &params,
            eps,
            &PipelineOptions::default(),
        )
        .unwrap();
        for grid in [2, 17, 400, 2000] {
            let r = measure_error(&f, fit.approximant(), interval, grid, &norms).unwrap();
            reports += 1;
            if !holder_ok(&r, interval.1 - interval.0) {
                holder_bad += 1;
            }
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("a.json");
    let pta = env!("CARGO_BIN_EXE_pta");
    let made = Command::new(pta)
        .args([
            "approx",
            "--function",
            "exp(x)",
            "--interval",
            "0",
            "1",
            "--alpha2",
            "1",
            "--eps",
            "1e-3",
            "--nodes",
            "integers",
            "--out",
        ])
        .arg(&file)
        .env_remove("PTA_MAX_DEGREE")
        .status()
        .unwrap();
    let verified = Command::new(pta)
        .args(["verify", "--bound", "1e-3"])
        .arg(&file)
        .output()
        .unwrap();
    let bytes = std::fs::read_to_string(&file).unwrap();
    let (approx, meta) = read_approximant(&file).unwrap();
    let byte_exact = approximant_to_json(&approx, &meta) == bytes;
    let ok = holder_bad == 0 && made.success() && verified.status.success() && byte_exact;
    verdict(
        10,
        "Lp <= (b-a)^(1/p) sup for p in {1, 2}; verify round-trips files byte-exactly",
        ok,
        &format!(
            "{reports} reports, {holder_bad} Hölder violations, verify exit {:?}, byte-exact {byte_exact}",
            verified.status.code()
        ),
    );
}
