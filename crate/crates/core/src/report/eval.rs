//! Precision and recall of predicted against truth documents.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;

use crate::error::{Error, Result};
use crate::report::parse_yaml;
use crate::slice::SliceDocument;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    /// One item per commit labelled M2M.
    CommitVerdict,
    /// One item per (commit, slice instance).
    SliceInstance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// `None` when nothing was predicted.
    pub precision: Option<f64>,
    /// `None` when the truth is empty.
    pub recall: Option<f64>,
    pub missing: Vec<String>,
    pub spurious: Vec<String>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn evaluate<T: Ord + Display>(predicted: &BTreeSet<T>, truth: &BTreeSet<T>) -> EvalReport {
    let tp = predicted.intersection(truth).count();
    let spurious: Vec<String> = predicted.difference(truth).map(ToString::to_string).collect();
    let missing: Vec<String> = truth.difference(predicted).map(ToString::to_string).collect();
    EvalReport {
        true_positives: tp,
        false_positives: spurious.len(),
        false_negatives: missing.len(),
        precision: ratio(tp, tp + spurious.len()),
        recall: ratio(tp, tp + missing.len()),
        missing,
        spurious,
    }
}

/// Three decimals, or `NA` when undefined.
pub fn format_ratio(value: Option<f64>) -> String {
    value.map_or_else(|| "NA".to_string(), |v| format!("{v:.3}"))
}

/// `project | commits | instances | P | R`
pub fn table_row(project: &str, commits: usize, instances: usize, report: &EvalReport) -> String {
    format!(
        "{project} | {commits} | {instances} | {} | {}",
        format_ratio(report.precision),
        format_ratio(report.recall)
    )
}

/// Commits labelled M2M.
pub fn commit_items(docs: &BTreeMap<String, SliceDocument>) -> BTreeSet<String> {
    docs.values()
        .filter(|d| d.verdict.is_m2m)
        .map(|d| d.commit_id.clone())
        .collect()
}

/// Slice instances of all documents, prefixed with the commit id.
pub fn instance_items(docs: &BTreeMap<String, SliceDocument>) -> BTreeSet<String> {
    docs.values()
        .flat_map(|d| {
            d.instances()
                .into_iter()
                .map(move |(sm, sc, m, tm, tc)| format!("{} {sm}:{sc}=>{m}|{tm}:{tc}", d.commit_id))
        })
        .collect()
}

/// Reads every `*.yaml` file of a directory, keyed by commit id.
pub fn load_documents(dir: &Path) -> Result<BTreeMap<String, SliceDocument>> {
    let io = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "yaml" || x == "yml"))
        .collect();
    paths.sort();
    let mut docs = BTreeMap::new();
    for path in paths {
        let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        let doc = parse_yaml(&text, &path)?;
        docs.insert(doc.commit_id.clone(), doc);
    }
    Ok(docs)
}
