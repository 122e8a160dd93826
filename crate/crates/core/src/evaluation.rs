//! Scoring predicted concept links against annotated pairs.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::completion::CompletionMode;
use crate::graph::{make_node_id, KnowledgeGraph, NodeId, NodeKind};
use crate::ingest::normalize;
use crate::scalar::Scalar;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: pair ({a}, {b}) already annotated")]
    DuplicatePair { line: u64, a: String, b: String },
    #[error("concept `{0}` is not in the graph")]
    UnknownConcept(String),
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Related,
    Unrelated,
}

impl std::str::FromStr for Label {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "related" => Ok(Label::Related),
            "unrelated" => Ok(Label::Unrelated),
            other => Err(format!("unknown label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedPair {
    pub concept_a: String,
    pub concept_b: String,
    pub label: Label,
}

const HEADER: [&str; 3] = ["concept_a", "concept_b", "label"];

pub fn load_pairs(path: &Path) -> Result<Vec<AnnotatedPair>, EvalError> {
    let file = std::fs::File::open(path).map_err(|source| EvalError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_pairs(file)
}

/// Parses `concept_a,concept_b,label` CSV. Concepts are normalized; a pair
/// may appear only once in either column order.
pub fn parse_pairs<R: Read>(reader: R) -> Result<Vec<AnnotatedPair>, EvalError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = csv.records();

    let header = records
        .next()
        .ok_or(EvalError::Parse {
            line: 1,
            message: "missing header row".into(),
        })?
        .map_err(|e| csv_error(&e))?;
    if header
        .iter()
        .map(str::to_lowercase)
        .ne(HEADER.iter().map(|s| s.to_string()))
    {
        return Err(EvalError::Parse {
            line: 1,
            message: format!("header must be `{}`", HEADER.join(",")),
        });
    }

    let mut seen = HashSet::new();
    let mut pairs = Vec::new();
    for record in records {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(EvalError::Parse {
                line,
                message: format!("expected 3 fields, found {}", record.len()),
            });
        }
        let (a, b) = (normalize(&record[0]), normalize(&record[1]));
        if a.is_empty() || b.is_empty() {
            return Err(EvalError::Parse {
                line,
                message: "empty concept".into(),
            });
        }
        if a == b {
            return Err(EvalError::Parse {
                line,
                message: format!("`{a}` paired with itself"),
            });
        }
        let label: Label = record[2]
            .parse()
            .map_err(|message| EvalError::Parse { line, message })?;
        let key = if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        };
        if !seen.insert(key) {
            return Err(EvalError::DuplicatePair { line, a, b });
        }
        pairs.push(AnnotatedPair {
            concept_a: a,
            concept_b: b,
            label,
        });
    }
    Ok(pairs)
}

fn csv_error(e: &csv::Error) -> EvalError {
    EvalError::Parse {
        line: e.position().map_or(0, |p| p.line()),
        message: e.to_string(),
    }
}

fn concept_id(g: &KnowledgeGraph, text: &str) -> Result<NodeId, EvalError> {
    let unknown = || EvalError::UnknownConcept(text.to_string());
    let id = make_node_id(&normalize(text)).map_err(|_| unknown())?;
    match g.node(&id) {
        Some(n) if n.kind == NodeKind::Concept => Ok(id),
        _ => Err(unknown()),
    }
}

/// Related when an embedding edge of the mode's relations joins any node of
/// one concept's cluster to any node of the other's.
pub fn predict_pair(
    g: &KnowledgeGraph,
    pair: &AnnotatedPair,
    mode: CompletionMode,
) -> Result<Label, EvalError> {
    let a = concept_id(g, &pair.concept_a)?;
    let b = concept_id(g, &pair.concept_b)?;
    let linked = mode.relations().iter().any(|&rel| {
        g.edges_with(rel).any(|e| {
            let (cf, ct) = (g.cluster_of(&e.from), g.cluster_of(&e.to));
            (cf == Some(&a) && ct == Some(&b)) || (cf == Some(&b) && ct == Some(&a))
        })
    });
    Ok(if linked {
        Label::Related
    } else {
        Label::Unrelated
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn record(&mut self, truth: Label, predicted: Label) {
        match (truth, predicted) {
            (Label::Related, Label::Related) => self.tp += 1,
            (Label::Unrelated, Label::Related) => self.fp += 1,
            (Label::Unrelated, Label::Unrelated) => self.tn += 1,
            (Label::Related, Label::Unrelated) => self.fn_ += 1,
        }
    }

    /// Metrics with `None` wherever a denominator is zero.
    pub fn metrics<T: Scalar>(&self) -> MetricReport<T> {
        let ratio = |num: usize, den: usize| (den > 0).then(|| T::of_count(num) / T::of_count(den));
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = match (precision, recall) {
            (Some(p), Some(r)) if p + r > T::zero() => Some(T::of(2.0) * p * r / (p + r)),
            _ => None,
        };
        MetricReport {
            accuracy: ratio(self.tp + self.tn, self.total()),
            precision,
            recall,
            f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport<T> {
    pub accuracy: Option<T>,
    pub precision: Option<T>,
    pub recall: Option<T>,
    pub f1: Option<T>,
}

/// Tallies predictions against the annotations.
///
/// # Panics
/// When `pairs` and `predictions` differ in length.
pub fn score<T: Scalar>(
    pairs: &[AnnotatedPair],
    predictions: &[Label],
) -> (ConfusionCounts, MetricReport<T>) {
    assert_eq!(pairs.len(), predictions.len(), "one prediction per pair");
    let mut counts = ConfusionCounts::default();
    for (pair, &predicted) in pairs.iter().zip(predictions) {
        counts.record(pair.label, predicted);
    }
    (counts, counts.metrics())
}

/// Predicts and scores every pair against `g`.
pub fn evaluate<T: Scalar>(
    g: &KnowledgeGraph,
    pairs: &[AnnotatedPair],
    mode: CompletionMode,
) -> Result<(ConfusionCounts, MetricReport<T>), EvalError> {
    let predictions = pairs
        .iter()
        .map(|p| predict_pair(g, p, mode))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(score(pairs, &predictions))
}

/// JSON layout of the metrics report; undefined metrics are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsDocument {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl MetricsDocument {
    pub fn new<T: Scalar>(counts: &ConfusionCounts, report: &MetricReport<T>) -> Self {
        MetricsDocument {
            tp: counts.tp,
            fp: counts.fp,
            tn: counts.tn,
            fn_: counts.fn_,
            accuracy: report.accuracy.map(T::as_f64),
            precision: report.precision.map(T::as_f64),
            recall: report.recall.map(T::as_f64),
            f1: report.f1.map(T::as_f64),
        }
    }

    pub fn to_table(&self) -> String {
        let fmt = |m: Option<f64>| m.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
        let mut out = String::new();
        let _ = writeln!(out, "tp {:>6}  fp {:>6}", self.tp, self.fp);
        let _ = writeln!(out, "fn {:>6}  tn {:>6}", self.fn_, self.tn);
        for (name, value) in [
            ("accuracy", self.accuracy),
            ("precision", self.precision),
            ("recall", self.recall),
            ("f1", self.f1),
        ] {
            let _ = writeln!(out, "{name:<10} {}", fmt(value));
        }
        out
    }
}
