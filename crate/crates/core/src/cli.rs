//! Command-line frontend for the `pta` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::algebra::{
    a_basis_table, format_rational, int, monomial_to_abasis, parse_rational, to_f64, ExactScalar,
};
use crate::approx::{
    approximant_to_json, build_at_threshold, chebyshev_proxy_with, fit_function, initial_threshold,
    measure_error, read_approximant, write_approximant, ApproxError, ErrorReport, NormExponent,
    PipelineOptions, ProxyOptions, RunMeta, DEFAULT_GRID,
};
use crate::coeffs::{
    coefficient_decay, residual_check, unit_target_coeffs, VandermondeSystem, DECAY_CONSTANT,
};
use crate::funcspec::{parse_function, FunctionSpec};
use crate::kernel::KernelParams;
use crate::nodes::{load_node_file, select_subsequence, NodesError, ScatteredSequence};

const INTEGER_WINDOW: (i64, i64) = (-1_000_000_000, 1_000_000_000);

const GRAMMAR_HELP: &str = "\
Target functions use one variable x:
  numbers      2, 0.25, 1e-3 (held exactly)
  operators    + - * /, x^k and x^-k for integer k
  functions    exp sin cos abs sqrt log
  example      --function \"1/(1+25*x^2)\"";

#[derive(Debug, Parser)]
#[command(name = "pta", version, about = "Approximation by translates of the Poisson kernel", after_help = GRAMMAR_HELP)]
struct Cli {
    /// Worker threads for grid evaluation.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print coefficient rows of A_0..A_n (ascending powers).
    Basis {
        #[arg(long)]
        n: usize,
        #[arg(long, value_parser = parse_alpha_sq)]
        alpha2: ExactScalar,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Unit-target coefficients on a doubling selection, with diagnostics.
    Coeffs {
        #[arg(long, default_value = "integers")]
        nodes: String,
        /// Selection threshold T.
        #[arg(long, value_parser = parse_rational_arg)]
        threshold: ExactScalar,
        /// System size N.
        #[arg(long)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Build an approximant of a target function.
    Approx {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,inf")]
        norms: Vec<NormExponent>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Re-measure a stored approximant on a fresh grid.
    Verify {
        file: PathBuf,
        /// Largest acceptable sup error.
        #[arg(long)]
        bound: f64,
        /// Target override; defaults to the one recorded in the file.
        #[arg(long)]
        function: Option<String>,
        #[arg(long, default_value_t = 5000)]
        grid: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,inf")]
        norms: Vec<NormExponent>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Error at thresholds T, 2T, 4T, ... as CSV.
    Sweep {
        #[command(flatten)]
        target: Target,
        /// First threshold; defaults to the pipeline's starting threshold.
        #[arg(long, value_parser = parse_rational_arg)]
        threshold: Option<ExactScalar>,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        /// Proxy tolerance for non-polynomial targets.
        #[arg(long, default_value_t = 1e-8)]
        proxy_tol: f64,
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
    },
}

#[derive(Debug, Args)]
struct Target {
    #[arg(long)]
    function: String,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true, required = true)]
    interval: Vec<f64>,
    #[arg(long, value_parser = parse_alpha_sq)]
    alpha2: ExactScalar,
    /// Node file, `integers`, or `integers:LO:HI`.
    #[arg(long, default_value = "integers")]
    nodes: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn parse_rational_arg(s: &str) -> Result<ExactScalar, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn parse_alpha_sq(s: &str) -> Result<ExactScalar, String> {
    let v = parse_rational_arg(s)?;
    if v <= int(0) {
        return Err(format!("alpha2 must be positive, got {s}"));
    }
    Ok(v)
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Approx(#[from] ApproxError),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Approx(ApproxError::InvalidArgument(_)) => 2,
            CliError::Approx(ApproxError::WindowExhausted { .. }) => 3,
            CliError::Approx(ApproxError::ToleranceUnreachable { .. }) => 4,
            CliError::Verify(_) => 5,
            _ => 1,
        }
    }
}

impl From<NodesError> for CliError {
    fn from(e: NodesError) -> Self {
        match e {
            NodesError::WindowExhausted { .. } => CliError::Approx(e.into()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

/// Runs the CLI on `args` (program name first) and returns the exit status.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    if cli.threads == 0 {
        let _ = writeln!(err, "error: --threads must be at least 1");
        return 2;
    }
    // the global pool can only be built once per process
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global();
    match run(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Basis { n, alpha2, format } => basis(n, &alpha2, format, out),
        Command::Coeffs {
            nodes,
            threshold,
            count,
            format,
        } => coeffs(&nodes, &threshold, count, format, out),
        Command::Approx {
            target,
            eps,
            grid,
            norms,
            out: path,
            format,
        } => approx(&target, eps, grid, &norms, path, format, out),
        Command::Verify {
            file,
            bound,
            function,
            grid,
            norms,
            format,
        } => verify(&file, bound, function.as_deref(), grid, &norms, format, out),
        Command::Sweep {
            target,
            threshold,
            steps,
            proxy_tol,
            grid,
        } => sweep(&target, threshold, steps, proxy_tol, grid, out),
    }
}

fn load_nodes(source: &str) -> Result<ScatteredSequence, CliError> {
    if source == "integers" {
        return Ok(ScatteredSequence::integers(
            INTEGER_WINDOW.0,
            INTEGER_WINDOW.1,
        )?);
    }
    if let Some(range) = source.strip_prefix("integers:") {
        let parsed = range
            .split_once(':')
            .and_then(|(lo, hi)| Some((lo.parse::<i64>().ok()?, hi.parse::<i64>().ok()?)));
        let Some((lo, hi)) = parsed else {
            return Err(CliError::Usage(format!(
                "expected integers:LO:HI, got {source:?}"
            )));
        };
        return Ok(ScatteredSequence::integers(lo, hi)?);
    }
    Ok(load_node_file(std::path::Path::new(source))?)
}

fn parse_target(text: &str) -> Result<FunctionSpec, CliError> {
    parse_function(text).map_err(|e| CliError::Usage(format!("--function: {e}")))
}

fn check_target(t: &Target) -> Result<((f64, f64), KernelParams), CliError> {
    let (a, b) = (t.interval[0], t.interval[1]);
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(CliError::Usage(format!(
            "--interval needs A < B, got {a} {b}"
        )));
    }
    let params = KernelParams::from_alpha_sq(t.alpha2.clone())
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(((a, b), params))
}

fn check_grid(grid: usize) -> Result<(), CliError> {
    if grid < 2 {
        return Err(CliError::Usage(format!(
            "--grid must be at least 2, got {grid}"
        )));
    }
    Ok(())
}

fn basis(
    n: usize,
    alpha2: &ExactScalar,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let table = a_basis_table(n, alpha2);
    match format {
        Format::Csv => {
            for poly in &table {
                let row: Vec<String> = poly.coeffs().iter().map(|c| c.to_string()).collect();
                writeln!(out, "{}", row.join(","))?;
            }
        }
        Format::Json => {
            let rows: Vec<Vec<String>> = table
                .iter()
                .map(|p| p.coeffs().iter().map(format_rational).collect())
                .collect();
            let doc = json!({ "alpha_sq": format_rational(alpha2), "rows": rows });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        }
    }
    Ok(())
}

fn coeffs(
    nodes: &str,
    threshold: &ExactScalar,
    count: usize,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let seq = load_nodes(nodes)?;
    let sel = select_subsequence(&seq, threshold, count)?;
    let sys = VandermondeSystem::from_selection(&sel).map_err(ApproxError::from)?;
    let b = unit_target_coeffs(&sys).map_err(ApproxError::from)?;
    let residual = residual_check(&sys, &b);
    let decay = coefficient_decay(&sel, &b);
    let limit = DECAY_CONSTANT / to_f64(sel.first().expect("count >= 1"));
    match format {
        Format::Csv => {
            writeln!(out, "m,node,coeff")?;
            for (m, (x, c)) in sel.nodes().iter().zip(&b.values).enumerate() {
                writeln!(out, "{},{},{}", m + 1, x, c)?;
            }
            writeln!(
                out,
                "# residual={residual} decay={decay:e} decay_limit={limit:e}"
            )?;
        }
        Format::Json => {
            let doc = json!({
                "nodes": sel.nodes().iter().map(format_rational).collect::<Vec<_>>(),
                "coeffs": b.values.iter().map(format_rational).collect::<Vec<_>>(),
                "residual": format_rational(&residual),
                "decay": decay,
                "decay_limit": limit,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        }
    }
    Ok(())
}

fn report_json(report: &ErrorReport) -> Json {
    let lp: serde_json::Map<String, Json> = report
        .lp_estimates
        .iter()
        .map(|(p, v)| (p.to_string(), json!(v)))
        .collect();
    json!({ "grid": report.grid_size, "sup": report.sup_estimate, "lp": lp })
}

fn write_report_csv(report: &ErrorReport, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "norm,estimate")?;
    writeln!(out, "sup,{:e}", report.sup_estimate)?;
    for (p, v) in &report.lp_estimates {
        writeln!(out, "{p},{v:e}")?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn approx(
    target: &Target,
    eps: f64,
    grid: usize,
    norms: &[NormExponent],
    path: Option<PathBuf>,
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(CliError::Usage(format!(
            "--eps must be positive, got {eps}"
        )));
    }
    check_grid(grid)?;
    let f = parse_target(&target.function)?;
    let (interval, params) = check_target(target)?;
    let seq = load_nodes(&target.nodes)?;
    let opts = PipelineOptions {
        grid,
        proxy: ProxyOptions {
            max_degree: max_degree_from_env()?,
            check_grid: 10 * grid,
        },
        ..PipelineOptions::default()
    };
    let fit = fit_function(&f, &seq, interval, &params, eps, &opts)?;
    let approximant = fit.approximant();
    let report = measure_error(&f, approximant, interval, grid, norms)?;
    let last = fit.fit.last();
    let meta = RunMeta {
        function: Some(f.canonical()),
        eps: Some(eps),
        grid: Some(grid),
        threshold: Some(format_rational(&last.threshold)),
        measured_sup: Some(fit.measured),
        proxy_degree: fit.proxy.as_ref().map(|p| p.degree),
        nodes: Some(target.nodes.clone()),
    };
    if let Some(path) = &path {
        write_approximant(path, approximant, &meta)?;
    }
    match format {
        Format::Json => {
            let doc = json!({
                "function": f.canonical(),
                "terms": approximant.terms().len(),
                "threshold": format_rational(&last.threshold),
                "rounds": fit.fit.rounds.len(),
                "proxy_degree": meta.proxy_degree,
                "certified_bound": approximant.certified_bound(),
                "error": report_json(&report),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        }
        Format::Csv => write_report_csv(&report, out)?,
    }
    Ok(())
}

fn max_degree_from_env() -> Result<usize, CliError> {
    match std::env::var("PTA_MAX_DEGREE") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|d| *d >= 1)
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "PTA_MAX_DEGREE must be a positive integer, got {v:?}"
                ))
            }),
        Err(_) => Ok(ProxyOptions::default().max_degree),
    }
}

fn verify(
    file: &std::path::Path,
    bound: f64,
    function: Option<&str>,
    grid: usize,
    norms: &[NormExponent],
    format: Format,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    if bound.is_nan() || bound < 0.0 {
        return Err(CliError::Usage(format!(
            "--bound must be nonnegative, got {bound}"
        )));
    }
    check_grid(grid)?;
    let (approximant, meta) = read_approximant(file)?;
    let text = function
        .map(str::to_string)
        .or_else(|| meta.function.clone())
        .ok_or_else(|| CliError::Usage("file records no function; pass --function".into()))?;
    let f = parse_target(&text)?;
    let report = measure_error(&f, &approximant, approximant.interval(), grid, norms)?;
    let original = std::fs::read_to_string(file)?;
    let round_trip = approximant_to_json(&approximant, &meta) == original;
    match format {
        Format::Json => {
            let doc = json!({
                "file": file.display().to_string(),
                "bound": bound,
                "round_trip": round_trip,
                "error": report_json(&report),
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"))?;
        }
        Format::Csv => write_report_csv(&report, out)?,
    }
    if !round_trip {
        return Err(CliError::Verify(format!(
            "{} does not re-serialize to identical bytes",
            file.display()
        )));
    }
    if report.sup_estimate > bound {
        return Err(CliError::Verify(format!(
            "sup error {:e} exceeds bound {bound:e}",
            report.sup_estimate
        )));
    }
    Ok(())
}

fn sweep(
    target: &Target,
    threshold: Option<ExactScalar>,
    steps: usize,
    proxy_tol: f64,
    grid: usize,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    check_grid(grid)?;
    let f = parse_target(&target.function)?;
    let (interval, params) = check_target(target)?;
    let seq = load_nodes(&target.nodes)?;
    let opts = PipelineOptions {
        grid,
        ..PipelineOptions::default()
    };
    let p = match f.to_polynomial() {
        Some(p) => p,
        None => {
            let proxy_opts = ProxyOptions {
                max_degree: max_degree_from_env()?,
                check_grid: 10 * grid,
            };
            chebyshev_proxy_with(&f, interval, proxy_tol, &proxy_opts)?.polynomial
        }
    };
    let alpha_sq = params.exact_alpha_sq().map_err(ApproxError::from)?;
    let expansion = monomial_to_abasis(&p, alpha_sq);
    let mut t = match threshold {
        Some(t) if t > int(0) => t,
        Some(t) => {
            return Err(CliError::Usage(format!(
                "--threshold must be positive, got {t}"
            )))
        }
        None => initial_threshold(&seq, interval, &params)?,
    };
    writeln!(out, "threshold,measured_sup,certified_bound")?;
    for _ in 0..steps {
        if expansion.coeffs.is_empty() {
            writeln!(out, "{},0e0,0e0", to_f64(&t))?;
        } else {
            let round = match build_at_threshold(&p, &expansion, &seq, interval, &params, &t, &opts)
            {
                Ok(r) => r,
                Err(ApproxError::WindowExhausted { .. }) => break,
                Err(e) => return Err(e.into()),
            };
            let measured = measure_error(&f, &round.approximant, interval, grid, &[])?.sup_estimate;
            let bound = round.bound.map(|b| format!("{b:e}")).unwrap_or_default();
            writeln!(out, "{},{measured:e},{bound}", to_f64(&t))?;
        }
        t *= int(2);
    }
    Ok(())
}
