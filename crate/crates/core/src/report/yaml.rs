//! Canonical YAML for slice documents.
//!
//! Emission is hand-written so the byte layout is fixed: keys in schema
//! order, every string double-quoted, LF line endings. Parsing goes through
//! serde_yaml.

use std::collections::BTreeSet;
use std::fmt::Write;
use std::path::Path;

use serde::Deserialize;

use crate::detect::{Criterion, M2MVerdict};
use crate::error::{Error, Result};
use crate::slice::{MemberContext, Relation, SliceDocument, SliceRecord};

pub const SCHEMA_VERSION: u32 = 1;

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 || c == '\u{7f}' => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn opt(s: Option<&str>) -> String {
    s.map_or_else(|| "null".to_string(), quote)
}

fn string_list(out: &mut String, key: &str, items: &[&str]) {
    if items.is_empty() {
        let _ = writeln!(out, "{key}: []");
        return;
    }
    let _ = writeln!(out, "{key}:");
    for item in items {
        let _ = writeln!(out, "  - {}", quote(item));
    }
}

/// Canonical text of a document; records are written in document order.
pub fn emit_yaml(doc: &SliceDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "schema: {SCHEMA_VERSION}");
    let _ = writeln!(out, "commit: {}", quote(&doc.commit_id));
    let _ = writeln!(out, "m2m: {}", doc.verdict.is_m2m);
    let criteria: Vec<&str> = doc.verdict.criteria.iter().map(|c| c.as_str()).collect();
    string_list(&mut out, "criteria", &criteria);
    if doc.slices.is_empty() {
        out.push_str("slices: []\n");
    } else {
        out.push_str("slices:\n");
        for r in &doc.slices {
            let lines: Vec<String> = r.evidence_lines.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "  - category: {}", r.category);
            let _ = writeln!(out, "    source_module: {}", opt(r.source_module.as_deref()));
            let _ = writeln!(out, "    source_class: {}", quote(&r.source_class));
            let _ = writeln!(out, "    member: {}", opt(r.member.as_deref()));
            let _ = writeln!(out, "    member_context: {}", quote(r.member_context.as_str()));
            let _ = writeln!(out, "    relation: {}", opt(r.relation.map(Relation::as_str)));
            let _ = writeln!(out, "    target_module: {}", opt(r.target_module.as_deref()));
            let _ = writeln!(out, "    target_class: {}", opt(r.target_class.as_deref()));
            let _ = writeln!(out, "    ambiguity: {}", r.ambiguity);
            let _ = writeln!(out, "    evidence_lines: [{}]", lines.join(", "));
            let _ = writeln!(out, "    operation: {}", opt(r.operation.as_deref()));
        }
    }
    let classes: Vec<&str> = doc.non_m2m_classes.iter().map(String::as_str).collect();
    string_list(&mut out, "non_m2m_classes", &classes);
    out
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    schema: u32,
    commit: String,
    m2m: bool,
    #[serde(default)]
    criteria: Vec<String>,
    #[serde(default)]
    slices: Vec<RawRecord>,
    #[serde(default)]
    non_m2m_classes: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRecord {
    category: u8,
    source_module: Option<String>,
    source_class: String,
    #[serde(default)]
    member: Option<String>,
    #[serde(default = "none_context")]
    member_context: String,
    #[serde(default)]
    relation: Option<String>,
    #[serde(default)]
    target_module: Option<String>,
    #[serde(default)]
    target_class: Option<String>,
    #[serde(default)]
    ambiguity: bool,
    #[serde(default)]
    evidence_lines: Vec<usize>,
    #[serde(default)]
    operation: Option<String>,
}

fn none_context() -> String {
    "none".into()
}

/// Parses a document; `path` only labels errors. Truth files use the same
/// schema, with `operation` optional.
pub fn parse_yaml(text: &str, path: &Path) -> Result<SliceDocument> {
    let schema_err = |message: String| Error::Schema {
        path: path.to_path_buf(),
        message,
    };
    let raw: RawDocument = serde_yaml::from_str(text).map_err(|e| schema_err(e.to_string()))?;
    if raw.schema != SCHEMA_VERSION {
        return Err(schema_err(format!("unsupported schema version {}", raw.schema)));
    }
    let criteria: BTreeSet<Criterion> = raw
        .criteria
        .iter()
        .map(|c| Criterion::parse(c).ok_or_else(|| schema_err(format!("unknown criterion '{c}'"))))
        .collect::<Result<_>>()?;
    let mut slices = Vec::with_capacity(raw.slices.len());
    for (i, r) in raw.slices.into_iter().enumerate() {
        let relation = match r.relation.as_deref() {
            None => None,
            Some(s) => {
                Some(Relation::parse(s).ok_or_else(|| schema_err(format!("slice {i}: unknown relation '{s}'")))?)
            }
        };
        let member_context = MemberContext::parse(&r.member_context)
            .ok_or_else(|| schema_err(format!("slice {i}: unknown member_context '{}'", r.member_context)))?;
        let record = SliceRecord {
            category: r.category,
            source_module: r.source_module,
            source_class: r.source_class,
            member: r.member,
            member_context,
            relation,
            target_module: r.target_module,
            target_class: r.target_class,
            ambiguity: r.ambiguity,
            evidence_lines: r.evidence_lines,
            operation: r.operation,
        };
        record.validate().map_err(|m| schema_err(format!("slice {i}: {m}")))?;
        slices.push(record);
    }
    Ok(SliceDocument {
        commit_id: raw.commit.clone(),
        verdict: M2MVerdict {
            commit_id: raw.commit,
            is_m2m: raw.m2m,
            criteria,
            evidence: Vec::new(),
        },
        slices,
        non_m2m_classes: raw.non_m2m_classes,
    })
}
