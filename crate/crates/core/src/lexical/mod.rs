//! Line-oriented lexical extraction for Java and Kotlin sources.
//!
//! Nothing here builds a syntax tree. Comments are blanked in a single
//! lexical pass (string literals are protected), and the remaining facts
//! are read with line-level patterns plus brace counting.

mod comments;
mod descriptor;
mod imports;
mod methods;
mod package;

pub use comments::{blank_literals, strip_comments, strip_comments_reporting};
pub use descriptor::{
    parse_module_descriptor, parse_module_descriptor_reporting, Directive, DirectiveOp, ModuleDescriptor,
};
pub use imports::{extract_imports, is_identifier, ImportKind, ImportRecord};
pub use methods::{extract_methods, extract_top_level_types, has_top_level_functions, MethodSpan};
pub use package::extract_package;

use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Java,
    Kotlin,
}

impl Language {
    /// Language of a source path, by extension.
    pub fn of_path(path: &str) -> Option<Language> {
        match Path::new(path).extension().and_then(|e| e.to_str()) {
            Some("java") => Some(Language::Java),
            Some("kt") => Some(Language::Kotlin),
            _ => None,
        }
    }
}

pub const DESCRIPTOR_FILE: &str = "module-info.java";

/// True for paths whose file name is `module-info.java`.
pub fn is_descriptor_path(path: &str) -> bool {
    path.rsplit('/').next() == Some(DESCRIPTOR_FILE)
}

/// True for `.java` / `.kt` sources that are not module descriptors.
pub fn is_class_source(path: &str) -> bool {
    Language::of_path(path).is_some() && !is_descriptor_path(path)
}

/// File stem of a repo-relative path (`a/b/Foo.java` -> `Foo`).
pub fn file_stem(path: &str) -> &str {
    let name = path.rsplit('/').next().unwrap_or(path);
    name.rsplit_once('.').map_or(name, |(stem, _)| stem)
}

const JAVA_KEYWORDS: &[&str] = &[
    "abstract",
    "assert",
    "boolean",
    "break",
    "byte",
    "case",
    "catch",
    "char",
    "class",
    "const",
    "continue",
    "default",
    "do",
    "double",
    "else",
    "enum",
    "extends",
    "final",
    "finally",
    "float",
    "for",
    "goto",
    "if",
    "implements",
    "import",
    "instanceof",
    "int",
    "interface",
    "long",
    "native",
    "new",
    "package",
    "private",
    "protected",
    "public",
    "return",
    "short",
    "static",
    "strictfp",
    "super",
    "switch",
    "synchronized",
    "this",
    "throw",
    "throws",
    "transient",
    "try",
    "void",
    "volatile",
    "while",
    "var",
    "record",
    "yield",
    "sealed",
    "permits",
    "true",
    "false",
    "null",
];

const KOTLIN_KEYWORDS: &[&str] = &[
    "as",
    "break",
    "class",
    "continue",
    "do",
    "else",
    "false",
    "for",
    "fun",
    "if",
    "in",
    "interface",
    "is",
    "null",
    "object",
    "package",
    "return",
    "super",
    "this",
    "throw",
    "true",
    "try",
    "typealias",
    "typeof",
    "val",
    "var",
    "when",
    "while",
];

/// Reserved word of the given language. Kotlin soft keywords (`get`, `data`,
/// `open`, ...) are ordinary identifiers here.
pub fn is_keyword(word: &str, language: Language) -> bool {
    match language {
        Language::Java => JAVA_KEYWORDS.contains(&word),
        Language::Kotlin => KOTLIN_KEYWORDS.contains(&word),
    }
}

/// Identifier tokens of a text, with 1-based line numbers.
///
/// Input is expected to have comments stripped and literals blanked.
pub fn identifier_tokens(text: &str) -> Vec<(usize, usize, &str)> {
    let mut out = Vec::new();
    let mut line = 1;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
        } else if c == b'_' || c == b'$' || c.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i] == b'_' || bytes[i] == b'$' || bytes[i].is_ascii_alphanumeric()) {
                i += 1;
            }
            out.push((line, start, &text[start..i]));
        } else if c.is_ascii_digit() {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
        } else {
            i += 1;
        }
    }
    out
}

/// 1-based line number of a byte offset.
pub(crate) fn line_of(text: &str, offset: usize) -> usize {
    text.as_bytes()[..offset.min(text.len())]
        .iter()
        .filter(|&&b| b == b'\n')
        .count()
        + 1
}
