//! Scattered node windows and the doubling subsequence.
//!
//! A scattered sequence is δ-separated and tends to ±∞. Only a finite window of
//! it is ever available, so selection can run out of nodes; that case is an
//! explicit error rather than a silent truncation.

use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::algebra::{int, parse_rational, ExactScalar, RationalParseError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NodesError {
    #[error("node sequence is empty")]
    Empty,
    #[error("sequence is not separated: value {value} appears more than once")]
    NotSeparated { value: String },
    #[error("integer window is empty: {lo} > {hi}")]
    EmptyRange { lo: i64, hi: i64 },
    #[error("selection threshold must be positive, got {0}")]
    NonPositiveThreshold(String),
    #[error("at least one node must be requested")]
    ZeroCount,
    #[error("window exhausted: requested {requested} doubling nodes past {threshold}, only {reachable} reachable")]
    WindowExhausted {
        requested: usize,
        reachable: usize,
        threshold: String,
    },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: RationalParseError,
    },
    #[error("cannot read node file {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Window {
    Explicit(Vec<ExactScalar>),
    /// Every integer in `lo..=hi`, never materialized.
    Integers {
        lo: i64,
        hi: i64,
    },
}

/// A validated, strictly increasing window of a scattered sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScatteredSequence {
    window: Window,
    delta: Option<ExactScalar>,
}

impl ScatteredSequence {
    /// All integers in `lo..=hi`.
    pub fn integers(lo: i64, hi: i64) -> Result<Self, NodesError> {
        if lo > hi {
            return Err(NodesError::EmptyRange { lo, hi });
        }
        let delta = (lo < hi).then(|| int(1));
        Ok(Self {
            window: Window::Integers { lo, hi },
            delta,
        })
    }

    /// Minimum gap between consecutive nodes; `None` for a single node.
    pub fn delta(&self) -> Option<&ExactScalar> {
        self.delta.as_ref()
    }

    pub fn len(&self) -> usize {
        match &self.window {
            Window::Explicit(v) => v.len(),
            Window::Integers { lo, hi } => (*hi as i128 - *lo as i128 + 1) as usize,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, index: usize) -> Option<ExactScalar> {
        match &self.window {
            Window::Explicit(v) => v.get(index).cloned(),
            Window::Integers { lo, hi } => {
                let value = *lo as i128 + index as i128;
                (value <= *hi as i128).then(|| ExactScalar::from_integer(BigInt::from(value)))
            }
        }
    }

    /// Materialized nodes; only sensible for explicit windows or small ranges.
    pub fn to_vec(&self) -> Vec<ExactScalar> {
        (0..self.len()).filter_map(|i| self.node(i)).collect()
    }

    pub fn largest(&self) -> ExactScalar {
        self.node(self.len() - 1).expect("windows are nonempty")
    }

    /// Index of the smallest node `≥ bound`.
    pub fn first_at_least(&self, bound: &ExactScalar) -> Option<usize> {
        match &self.window {
            Window::Explicit(v) => {
                let i = v.partition_point(|x| x < bound);
                (i < v.len()).then_some(i)
            }
            Window::Integers { lo, hi } => {
                let ceil = bound.numer().div_ceil(bound.denom());
                let first = ceil.max(BigInt::from(*lo));
                (first <= BigInt::from(*hi))
                    .then(|| (first - BigInt::from(*lo)).to_usize())
                    .flatten()
            }
        }
    }

    /// Index of the smallest node strictly greater than `bound`.
    pub fn first_above(&self, bound: &ExactScalar) -> Option<usize> {
        let i = self.first_at_least(bound)?;
        if self.node(i).as_ref() == Some(bound) {
            (i + 1 < self.len()).then_some(i + 1)
        } else {
            Some(i)
        }
    }
}

/// Sorts and checks separation; δ is the smallest consecutive gap.
pub fn validate_scattered(raw: &[ExactScalar]) -> Result<ScatteredSequence, NodesError> {
    if raw.is_empty() {
        return Err(NodesError::Empty);
    }
    let mut nodes = raw.to_vec();
    nodes.sort();
    let mut delta: Option<ExactScalar> = None;
    for pair in nodes.windows(2) {
        let gap = &pair[1] - &pair[0];
        if gap.is_zero() {
            return Err(NodesError::NotSeparated {
                value: pair[0].to_string(),
            });
        }
        if delta.as_ref().is_none_or(|d| &gap < d) {
            delta = Some(gap);
        }
    }
    Ok(ScatteredSequence {
        window: Window::Explicit(nodes),
        delta,
    })
}

/// Parses a node file: one decimal or `p/q` literal per line, `#` starts a
/// comment, blank lines ignored.
pub fn parse_node_list(text: &str) -> Result<Vec<ExactScalar>, NodesError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        out.push(parse_rational(body).map_err(|source| NodesError::Parse {
            line: i + 1,
            source,
        })?);
    }
    Ok(out)
}

pub fn load_node_file(path: &Path) -> Result<ScatteredSequence, NodesError> {
    let text = fs::read_to_string(path).map_err(|e| NodesError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    validate_scattered(&parse_node_list(&text)?)
}

/// The doubling subsequence `x_{j(1)} ≥ T`, `x_{j(n+1)} ≥ 2·x_{j(n)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsequenceSelection {
    /// `(index into the window, node value)`, increasing.
    pub picked: Vec<(usize, ExactScalar)>,
    pub start_threshold: ExactScalar,
}

impl SubsequenceSelection {
    pub fn nodes(&self) -> Vec<ExactScalar> {
        self.picked.iter().map(|(_, x)| x.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.picked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.picked.is_empty()
    }

    pub fn first(&self) -> Option<&ExactScalar> {
        self.picked.first().map(|(_, x)| x)
    }

    /// First `k` picks, same threshold.
    pub fn prefix(&self, k: usize) -> Self {
        Self {
            picked: self.picked[..k.min(self.picked.len())].to_vec(),
            start_threshold: self.start_threshold.clone(),
        }
    }
}

/// Greedy first-fit: the smallest node `≥ threshold`, then repeatedly the
/// smallest node `≥ 2 ×` the previous pick.
pub fn select_subsequence(
    seq: &ScatteredSequence,
    threshold: &ExactScalar,
    count: usize,
) -> Result<SubsequenceSelection, NodesError> {
    if !threshold.is_positive() {
        return Err(NodesError::NonPositiveThreshold(threshold.to_string()));
    }
    if count == 0 {
        return Err(NodesError::ZeroCount);
    }
    let two = int(2);
    let mut picked: Vec<(usize, ExactScalar)> = Vec::with_capacity(count);
    let mut bound = threshold.clone();
    while picked.len() < count {
        let Some(i) = seq.first_at_least(&bound) else {
            return Err(NodesError::WindowExhausted {
                requested: count,
                reachable: picked.len(),
                threshold: threshold.to_string(),
            });
        };
        let x = seq.node(i).expect("index in range");
        bound = &x * &two;
        picked.push((i, x));
    }
    Ok(SubsequenceSelection {
        picked,
        start_threshold: threshold.clone(),
    })
}

/// Number of doubling picks reachable from `threshold` (capped at `limit`).
pub fn reachable_count(seq: &ScatteredSequence, threshold: &ExactScalar, limit: usize) -> usize {
    if !threshold.is_positive() {
        return 0;
    }
    let mut bound = threshold.clone();
    let mut n = 0;
    while n < limit {
        let Some(i) = seq.first_at_least(&bound) else {
            break;
        };
        bound = seq.node(i).expect("index in range") * int(2);
        n += 1;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(range: std::ops::RangeInclusive<i64>) -> Vec<ExactScalar> {
        range.map(int).collect()
    }

    fn values(sel: &SubsequenceSelection) -> Vec<ExactScalar> {
        sel.nodes()
    }

    #[test]
    fn unit_spacing() {
        let seq = validate_scattered(&ints(-100..=100)).unwrap();
        assert_eq!(seq.delta(), Some(&int(1)));
        assert_eq!(seq.len(), 201);
    }

    #[test]
    fn minimum_gap() {
        let raw: Vec<_> = ["0", "0.5", "0.5001", "3"]
            .iter()
            .map(|s| parse_rational(s).unwrap())
            .collect();
        let seq = validate_scattered(&raw).unwrap();
        assert_eq!(seq.delta(), Some(&parse_rational("1/10000").unwrap()));
    }

    #[test]
    fn duplicates_and_empty_rejected() {
        assert!(matches!(
            validate_scattered(
                &ints(1..=1)
                    .into_iter()
                    .chain(ints(1..=2))
                    .collect::<Vec<_>>()
            ),
            Err(NodesError::NotSeparated { .. })
        ));
        assert_eq!(validate_scattered(&[]), Err(NodesError::Empty));
    }

    #[test]
    fn unsorted_input_is_sorted() {
        let seq = validate_scattered(&[int(5), int(-2), int(3)]).unwrap();
        assert_eq!(seq.to_vec(), vec![int(-2), int(3), int(5)]);
        assert_eq!(seq.delta(), Some(&int(2)));
    }

    #[test]
    fn greedy_doubling() {
        let explicit = validate_scattered(&ints(1..=1000)).unwrap();
        let lazy = ScatteredSequence::integers(1, 1000).unwrap();
        for seq in [&explicit, &lazy] {
            let sel = select_subsequence(seq, &int(10), 3).unwrap();
            assert_eq!(values(&sel), vec![int(10), int(20), int(40)]);
            let sel = select_subsequence(seq, &int(10), 1).unwrap();
            assert_eq!(values(&sel), vec![int(10)]);
            assert_eq!(
                select_subsequence(seq, &int(600), 2),
                Err(NodesError::WindowExhausted {
                    requested: 2,
                    reachable: 1,
                    threshold: "600".into()
                })
            );
        }
    }

    #[test]
    fn fractional_threshold_rounds_up_on_integers() {
        let seq = ScatteredSequence::integers(-5, 100).unwrap();
        let t = parse_rational("2.83").unwrap();
        let sel = select_subsequence(&seq, &t, 3).unwrap();
        assert_eq!(values(&sel), vec![int(3), int(6), int(12)]);
        assert_eq!(sel.picked[0].0, 8);
    }

    #[test]
    fn selection_preconditions() {
        let seq = ScatteredSequence::integers(1, 10).unwrap();
        assert!(matches!(
            select_subsequence(&seq, &int(0), 1),
            Err(NodesError::NonPositiveThreshold(_))
        ));
        assert_eq!(
            select_subsequence(&seq, &int(1), 0),
            Err(NodesError::ZeroCount)
        );
    }

    #[test]
    fn negative_nodes_never_picked() {
        let seq = validate_scattered(&[int(-8), int(-4), int(3), int(7)]).unwrap();
        let sel = select_subsequence(&seq, &parse_rational("1/2").unwrap(), 2).unwrap();
        assert_eq!(values(&sel), vec![int(3), int(7)]);
    }

    #[test]
    fn first_above_skips_equal_node() {
        let seq = ScatteredSequence::integers(-3, 3).unwrap();
        assert_eq!(seq.first_above(&int(1)), Some(5));
        assert_eq!(seq.first_above(&int(3)), None);
        assert_eq!(seq.first_above(&parse_rational("0.5").unwrap()), Some(4));
    }

    #[test]
    fn node_file_parsing() {
        let text = "# header\n1\n2.5 # trailing\n\n7/2\n-1e1\n";
        let nodes = parse_node_list(text).unwrap();
        assert_eq!(
            nodes,
            vec![
                int(1),
                parse_rational("5/2").unwrap(),
                parse_rational("7/2").unwrap(),
                int(-10)
            ]
        );
        assert!(matches!(
            parse_node_list("1\nabc\n"),
            Err(NodesError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn reachable_counts() {
        let seq = ScatteredSequence::integers(1, 1000).unwrap();
        assert_eq!(reachable_count(&seq, &int(10), 100), 7);
        assert_eq!(reachable_count(&seq, &int(600), 100), 1);
        assert_eq!(reachable_count(&seq, &int(10), 3), 3);
    }
}
