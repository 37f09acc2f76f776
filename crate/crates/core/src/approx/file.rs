use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ApproxError, KernelApproximant, Term};
use crate::algebra::{format_rational, parse_rational, ExactScalar};
use crate::kernel::KernelParams;

/// Run metadata stored next to the approximant. Holds no clock readings, so
/// identical runs write identical files.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunMeta {
    pub function: Option<String>,
    pub eps: Option<f64>,
    pub grid: Option<usize>,
    pub threshold: Option<String>,
    pub measured_sup: Option<f64>,
    pub proxy_degree: Option<usize>,
    pub nodes: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    node: String,
    coeff: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApproximantRecord {
    alpha_sq: String,
    interval: [f64; 2],
    terms: Vec<TermRecord>,
    certified_bound: Option<f64>,
    #[serde(default)]
    meta: RunMeta,
}

/// Pretty JSON with a trailing newline.
pub fn approximant_to_json(approx: &KernelApproximant, meta: &RunMeta) -> String {
    let record = ApproximantRecord {
        alpha_sq: format_rational(approx.alpha_sq()),
        interval: [approx.interval().0, approx.interval().1],
        terms: approx
            .terms()
            .iter()
            .map(|t| TermRecord {
                node: format_rational(&t.node),
                coeff: format_rational(&t.coeff),
            })
            .collect(),
        certified_bound: approx.certified_bound(),
        meta: meta.clone(),
    };
    let mut text = serde_json::to_string_pretty(&record).expect("plain data serializes");
    text.push('\n');
    text
}

pub fn approximant_from_json(text: &str) -> Result<(KernelApproximant, RunMeta), ApproxError> {
    let record: ApproximantRecord =
        serde_json::from_str(text).map_err(|e| ApproxError::BadFile(e.to_string()))?;
    let rational = |field: &str, s: &str| -> Result<ExactScalar, ApproxError> {
        parse_rational(s).map_err(|e| ApproxError::BadFile(format!("{field}: {e}")))
    };
    let params = KernelParams::from_alpha_sq(rational("alpha_sq", &record.alpha_sq)?)
        .map_err(|e| ApproxError::BadFile(e.to_string()))?;
    let terms = record
        .terms
        .iter()
        .map(|t| {
            Ok(Term {
                node: rational("node", &t.node)?,
                coeff: rational("coeff", &t.coeff)?,
            })
        })
        .collect::<Result<Vec<_>, ApproxError>>()?;
    let interval = (record.interval[0], record.interval[1]);
    let approx = KernelApproximant::new(params, terms, interval, record.certified_bound)
        .map_err(|e| ApproxError::BadFile(e.to_string()))?;
    Ok((approx, record.meta))
}

pub fn write_approximant(
    path: &Path,
    approx: &KernelApproximant,
    meta: &RunMeta,
) -> Result<(), ApproxError> {
    fs::write(path, approximant_to_json(approx, meta))
        .map_err(|e| ApproxError::BadFile(format!("{}: {e}", path.display())))
}

pub fn read_approximant(path: &Path) -> Result<(KernelApproximant, RunMeta), ApproxError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ApproxError::BadFile(format!("{}: {e}", path.display())))?;
    approximant_from_json(&text)
}
