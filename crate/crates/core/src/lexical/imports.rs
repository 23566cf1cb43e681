use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::Language;
use crate::diag::{Diagnostic, Diagnostics};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportKind {
    Plain,
    Wildcard,
    StaticMember,
    InnerClass,
}

/// One import statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ImportRecord {
    pub raw: String,
    pub kind: ImportKind,
    pub segments: Vec<String>,
    pub file: String,
    pub line: usize,
    /// The statement carried an explicit `static` keyword (Java only).
    pub explicit_static: bool,
}

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

fn starts_lower(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_lowercase() || c == '_')
}

/// Java/Kotlin identifier syntax (ASCII subset).
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' || c == '$' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$')
}

impl ImportRecord {
    /// Dotted form of the imported path, e.g. `java.util.Map.entry`.
    pub fn path(&self) -> String {
        self.segments.join(".")
    }

    /// Identity used when diffing import lists: the path plus the static flag.
    pub fn key(&self) -> (bool, String) {
        (self.explicit_static, self.path())
    }

    pub fn terminal(&self) -> &str {
        self.segments.last().map_or("", String::as_str)
    }

    /// Segments naming the class this import depends on, cut after the first
    /// capitalized segment. `None` for a package wildcard.
    pub fn class_path(&self) -> Option<Vec<&str>> {
        let segs: Vec<&str> = self.segments.iter().map(String::as_str).collect();
        let base: &[&str] = match self.kind {
            ImportKind::Wildcard => {
                let base = &segs[..segs.len() - 1];
                if !base.iter().any(|s| starts_upper(s)) {
                    return None;
                }
                base
            }
            ImportKind::StaticMember => &segs[..segs.len().saturating_sub(1).max(1)],
            ImportKind::Plain | ImportKind::InnerClass => &segs,
        };
        match base.iter().position(|s| starts_upper(s)) {
            Some(i) => Some(base[..=i].to_vec()),
            None => Some(base.to_vec()),
        }
    }

    /// Package named by a package wildcard (`a.b.*` -> `a.b`).
    pub fn wildcard_package(&self) -> Option<String> {
        if self.kind == ImportKind::Wildcard && self.class_path().is_none() {
            Some(self.segments[..self.segments.len() - 1].join("."))
        } else {
            None
        }
    }

    /// Canonical statement text for the record in the given language.
    pub fn render(&self, language: Language) -> String {
        match language {
            Language::Java if self.explicit_static => format!("import static {};", self.path()),
            Language::Java => format!("import {};", self.path()),
            Language::Kotlin => format!("import {}", self.path()),
        }
    }
}

fn classify(segments: &[String], explicit_static: bool, language: Language) -> ImportKind {
    let last = segments.last().map_or("", String::as_str);
    let penultimate = segments.len().checked_sub(2).map(|i| segments[i].as_str());
    if explicit_static {
        return ImportKind::StaticMember;
    }
    if last == "*" {
        return ImportKind::Wildcard;
    }
    let pen_upper = penultimate.is_some_and(starts_upper);
    match language {
        // Kotlin has no `static` keyword: a lowercase member under a
        // capitalized owner is taken to be a static member.
        Language::Kotlin if pen_upper && starts_lower(last) => ImportKind::StaticMember,
        _ if pen_upper => ImportKind::InnerClass,
        _ => ImportKind::Plain,
    }
}

fn import_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^import\s+(static\s+)?([A-Za-z_$`][\w$`]*(?:\s*\.\s*(?:[A-Za-z_$`][\w$`]*|\*))*)(?:\s+as\s+`?[A-Za-z_$][\w$]*`?)?\s*$",
        )
        .unwrap()
    })
}

/// Extracts every import statement from comment-stripped source.
///
/// Statements are recognized at the start of a line or right after a `;`.
/// A statement that starts with `import` but does not parse is skipped with
/// a diagnostic.
pub fn extract_imports(source: &str, language: Language, file: &str, diags: &mut Diagnostics) -> Vec<ImportRecord> {
    let mut out = Vec::new();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        for chunk in line.split(';') {
            let stmt = chunk.trim();
            let is_import = stmt
                .strip_prefix("import")
                .is_some_and(|rest| rest.starts_with(char::is_whitespace));
            if !is_import {
                continue;
            }
            let Some(caps) = import_re().captures(stmt) else {
                diags.push(
                    Diagnostic::new("malformed-import", format!("cannot parse '{stmt}'"))
                        .in_file(file)
                        .at_line(line_no),
                );
                continue;
            };
            let explicit_static = caps.get(1).is_some();
            if explicit_static && language == Language::Kotlin {
                diags.push(
                    Diagnostic::new("malformed-import", "Kotlin has no static imports")
                        .in_file(file)
                        .at_line(line_no),
                );
                continue;
            }
            let segments: Vec<String> = caps[2]
                .split('.')
                .map(|s| s.trim().trim_matches('`').to_string())
                .collect();
            let valid = segments
                .iter()
                .enumerate()
                .all(|(i, s)| is_identifier(s) || (s == "*" && i == segments.len() - 1));
            if !valid || segments.len() < 2 {
                diags.push(
                    Diagnostic::new("malformed-import", format!("bad path in '{stmt}'"))
                        .in_file(file)
                        .at_line(line_no),
                );
                continue;
            }
            let kind = classify(&segments, explicit_static, language);
            out.push(ImportRecord {
                raw: stmt.to_string(),
                kind,
                segments,
                file: file.to_string(),
                line: line_no,
                explicit_static,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(src: &str, lang: Language) -> ImportRecord {
        let mut d = Diagnostics::new();
        let mut v = extract_imports(src, lang, "F", &mut d);
        assert_eq!(v.len(), 1, "{src}");
        v.remove(0)
    }

    fn segs(r: &ImportRecord) -> Vec<&str> {
        r.segments.iter().map(String::as_str).collect()
    }

    #[test]
    fn java_static_member() {
        let r = one("import static java.util.Map.entry;", Language::Java);
        assert_eq!(r.kind, ImportKind::StaticMember);
        assert_eq!(segs(&r), ["java", "util", "Map", "entry"]);
        assert_eq!(r.class_path().unwrap(), ["java", "util", "Map"]);
    }

    #[test]
    fn wildcard() {
        let r = one("import aa.*;", Language::Java);
        assert_eq!(r.kind, ImportKind::Wildcard);
        assert_eq!(r.wildcard_package().as_deref(), Some("aa"));
        assert!(r.class_path().is_none());
    }

    #[test]
    fn inner_and_plain() {
        let r = one("import a.B.Inner;", Language::Java);
        assert_eq!(r.kind, ImportKind::InnerClass);
        assert_eq!(r.class_path().unwrap(), ["a", "B"]);
        let r = one("import a.b.C;", Language::Java);
        assert_eq!(r.kind, ImportKind::Plain);
        assert_eq!(r.class_path().unwrap(), ["a", "b", "C"]);
    }

    #[test]
    fn kotlin_static_by_capitalization() {
        let r = one("import a.B.m", Language::Kotlin);
        assert_eq!(r.kind, ImportKind::StaticMember);
        assert_eq!(r.class_path().unwrap(), ["a", "B"]);
        let r = one("import a.b.topLevel", Language::Kotlin);
        assert_eq!(r.kind, ImportKind::Plain);
        let r = one("import a.b.C as D", Language::Kotlin);
        assert_eq!(segs(&r), ["a", "b", "C"]);
    }

    #[test]
    fn empty_source() {
        let mut d = Diagnostics::new();
        assert!(extract_imports("", Language::Java, "F", &mut d).is_empty());
        assert!(d.is_empty());
    }

    #[test]
    fn several_per_line_and_lines() {
        let mut d = Diagnostics::new();
        let v = extract_imports("package p;\n\nimport a.B; import c.D;\n", Language::Java, "F", &mut d);
        assert_eq!(v.len(), 2);
        assert!(v.iter().all(|r| r.line == 3));
    }

    #[test]
    fn malformed_is_skipped() {
        let mut d = Diagnostics::new();
        let v = extract_imports("import a.;\nimport b.C;", Language::Java, "F", &mut d);
        assert_eq!(v.len(), 1);
        assert!(d.has_code("malformed-import"));
    }

    #[test]
    fn identifiers_not_starting_with_import() {
        let mut d = Diagnostics::new();
        let v = extract_imports("importantThing();\nint importer;", Language::Java, "F", &mut d);
        assert!(v.is_empty());
        assert!(d.is_empty());
    }
}
