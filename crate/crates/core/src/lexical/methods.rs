use std::sync::OnceLock;

use regex::Regex;

use super::{blank_literals, is_keyword, line_of, Language};
use crate::diag::{Diagnostic, Diagnostics};

/// A method (or Kotlin function) declaration and the lines it covers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MethodSpan {
    pub name: String,
    pub start_line: usize,
    pub end_line: usize,
    pub signature_text: String,
}

impl MethodSpan {
    pub fn contains(&self, line: usize) -> bool {
        (self.start_line..=self.end_line).contains(&line)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BlockKind {
    Method,
    Anonymous,
    Type,
    Other,
}

struct Frame {
    kind: BlockKind,
    suppressed: bool,
    name: String,
    start_line: usize,
    signature: String,
}

fn java_method_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?s)([A-Za-z_$][\w$]*)\s*\(([^()]*(?:\([^()]*\)[^()]*)*)\)\s*(?:throws\s+[\w$.,\s<>]+)?$").unwrap()
    })
}

fn anonymous_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)\bnew\s+[\w$.<>?,\s\[\]]+\(([^()]*(?:\([^()]*\)[^()]*)*)\)\s*$").unwrap())
}

fn kotlin_fun_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\bfun\s*(?:<[^>{}]*>\s*)?(?:[\w$.<>?,\s]+?\.)?`?([A-Za-z_$][\w$]*)`?\s*\(").unwrap())
}

fn expression_body_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(?::[^=]+?)?=").unwrap())
}

fn kotlin_object_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)\bobject\s*(?::[^{]*)?$").unwrap())
}

fn type_decl_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b(?:class|interface|enum|record|object)\s+`?([A-Za-z_$][\w$]*)").unwrap())
}

fn collapse(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Offset just past the `)` matching the `(` at `open`, if balanced.
fn close_paren(text: &str, open: usize) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in text[open..].char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(open + i + 1);
                }
            }
            _ => {}
        }
    }
    None
}

fn first_non_ws(text: &str, from: usize, to: usize) -> usize {
    text[from..to]
        .char_indices()
        .find(|(_, c)| !c.is_whitespace())
        .map_or(to, |(i, _)| from + i)
}

/// What a `{` opens, given the header text since the previous delimiter.
fn classify_java(header: &str) -> (BlockKind, Option<(String, usize)>) {
    let trimmed = header.trim_end();
    if anonymous_re().is_match(trimmed) {
        return (BlockKind::Anonymous, None);
    }
    if let Some(caps) = java_method_re().captures(trimmed) {
        let name_m = caps.get(1).unwrap();
        let name = name_m.as_str();
        let prefix = &trimmed[..name_m.start()];
        let prev_word = prefix
            .trim_end()
            .rsplit(|c: char| !(c.is_alphanumeric() || c == '_' || c == '$'))
            .next()
            .unwrap_or("");
        let opens = prefix.matches('(').count();
        let closes = prefix.matches(')').count();
        let is_type_decl = matches!(prev_word, "class" | "interface" | "enum" | "record");
        if !is_keyword(name, Language::Java)
            && prev_word != "new"
            && !prefix.trim_end().ends_with('.')
            && opens <= closes
            && !is_type_decl
        {
            return (BlockKind::Method, Some((name.to_string(), 0)));
        }
    }
    if type_decl_re().is_match(trimmed) {
        return (BlockKind::Type, None);
    }
    (BlockKind::Other, None)
}

fn classify_kotlin(header: &str) -> (BlockKind, Option<(String, usize)>) {
    let trimmed = header.trim_end();
    if let Some(caps) = kotlin_fun_re().captures_iter(trimmed).last() {
        let whole = caps.get(0).unwrap();
        let open = whole.end() - 1;
        // the `{` belongs to this fun only if its parameter list closed
        if close_paren(trimmed, open).is_some() {
            return (BlockKind::Method, Some((caps[1].to_string(), whole.start())));
        }
    }
    if kotlin_object_re().is_match(trimmed) {
        return (BlockKind::Anonymous, None);
    }
    if type_decl_re().is_match(trimmed) {
        return (BlockKind::Type, None);
    }
    (BlockKind::Other, None)
}

/// Everything a single brace-balanced pass learns about a file.
struct Outline {
    methods: Vec<MethodSpan>,
    top_level_types: Vec<String>,
    top_level_functions: bool,
}

fn outline(source: &str, language: Language, diags: &mut Diagnostics) -> Outline {
    let text = blank_literals(source);
    let mut stack: Vec<Frame> = Vec::new();
    let mut methods = Vec::new();
    let mut top_level_types = Vec::new();
    let mut top_level_functions = false;
    let mut seg_start = 0usize;

    // Kotlin expression-bodied functions never open a block; they are
    // recognized inside header segments instead.
    let expression_funs = |seg_start: usize,
                           seg_end: usize,
                           skip_last: bool,
                           stack: &[Frame],
                           methods: &mut Vec<MethodSpan>,
                           top_fun: &mut bool| {
        if language != Language::Kotlin {
            return;
        }
        let suppressed = stack
            .last()
            .is_some_and(|f| f.suppressed || f.kind == BlockKind::Anonymous);
        let seg = &text[seg_start..seg_end];
        let found: Vec<_> = kotlin_fun_re().captures_iter(seg).collect();
        let n = found.len();
        for (i, caps) in found.iter().enumerate() {
            if skip_last && i + 1 == n {
                break;
            }
            if stack.is_empty() {
                *top_fun = true;
            }
            let whole = caps.get(0).unwrap();
            let Some(after) = close_paren(seg, whole.end() - 1) else {
                continue;
            };
            let next_start = found.get(i + 1).map_or(seg.len(), |c| c.get(0).unwrap().start());
            let tail = &seg[after..next_start];
            if !expression_body_re().is_match(tail) {
                // abstract declaration without a body
                continue;
            }
            if suppressed {
                continue;
            }
            let start = seg_start + whole.start();
            // the body ends on the line where the expression starts
            let eq = after + tail.find('=').unwrap_or(0);
            let body_end = seg_start + first_non_ws(seg, eq + 1, next_start);
            methods.push(MethodSpan {
                name: caps[1].to_string(),
                start_line: line_of(&text, start),
                end_line: line_of(&text, body_end.max(start)),
                signature_text: collapse(&seg[whole.start()..after]),
            });
        }
    };

    let scan_top_types = |seg: &str, stack: &[Frame], types: &mut Vec<String>| {
        if stack.is_empty() {
            for caps in type_decl_re().captures_iter(seg) {
                types.push(caps[1].to_string());
            }
        }
    };

    for (pos, c) in text.char_indices() {
        match c {
            '{' => {
                let header = &text[seg_start..pos];
                let (kind, method) = match language {
                    Language::Java => classify_java(header),
                    Language::Kotlin => classify_kotlin(header),
                };
                expression_funs(
                    seg_start,
                    pos,
                    kind == BlockKind::Method,
                    &stack,
                    &mut methods,
                    &mut top_level_functions,
                );
                if kind == BlockKind::Type || (language == Language::Kotlin && stack.is_empty()) {
                    scan_top_types(header, &stack, &mut top_level_types);
                }
                if kind == BlockKind::Method && stack.is_empty() {
                    top_level_functions = true;
                }
                let parent_suppressed = stack
                    .last()
                    .is_some_and(|f| f.suppressed || f.kind == BlockKind::Anonymous);
                let (name, start_line, signature) = match method {
                    Some((name, offset_in_header)) => {
                        let start = match language {
                            Language::Java => first_non_ws(&text, seg_start, pos),
                            Language::Kotlin => seg_start + offset_in_header,
                        };
                        let sig = collapse(&text[start..pos]);
                        (name, line_of(&text, start), sig)
                    }
                    None => (String::new(), line_of(&text, pos), String::new()),
                };
                stack.push(Frame {
                    kind,
                    suppressed: parent_suppressed,
                    name,
                    start_line,
                    signature,
                });
                seg_start = pos + 1;
            }
            '}' => {
                expression_funs(seg_start, pos, false, &stack, &mut methods, &mut top_level_functions);
                if language == Language::Kotlin {
                    scan_top_types(&text[seg_start..pos], &stack, &mut top_level_types);
                }
                match stack.pop() {
                    Some(frame) => {
                        if frame.kind == BlockKind::Method && !frame.suppressed {
                            methods.push(MethodSpan {
                                name: frame.name,
                                start_line: frame.start_line,
                                end_line: line_of(&text, pos),
                                signature_text: frame.signature,
                            });
                        }
                    }
                    None => diags.push(
                        Diagnostic::new("unbalanced-braces", "closing brace without an open block")
                            .at_line(line_of(&text, pos)),
                    ),
                }
                seg_start = pos + 1;
            }
            ';' => {
                expression_funs(seg_start, pos, false, &stack, &mut methods, &mut top_level_functions);
                if language == Language::Kotlin {
                    scan_top_types(&text[seg_start..pos], &stack, &mut top_level_types);
                }
                seg_start = pos + 1;
            }
            _ => {}
        }
    }
    expression_funs(
        seg_start,
        text.len(),
        false,
        &stack,
        &mut methods,
        &mut top_level_functions,
    );
    if language == Language::Kotlin {
        scan_top_types(&text[seg_start..], &stack, &mut top_level_types);
    }

    if !stack.is_empty() {
        diags.push(Diagnostic::new(
            "unbalanced-braces",
            format!("{} block(s) left open; spans run to end of file", stack.len()),
        ));
        let last_line = text.lines().count().max(1);
        while let Some(frame) = stack.pop() {
            if frame.kind == BlockKind::Method && !frame.suppressed {
                methods.push(MethodSpan {
                    name: frame.name,
                    start_line: frame.start_line,
                    end_line: last_line,
                    signature_text: frame.signature,
                });
            }
        }
    }

    methods.sort_by(|a, b| (a.start_line, a.end_line, &a.name).cmp(&(b.start_line, b.end_line, &b.name)));
    top_level_types.dedup();
    Outline {
        methods,
        top_level_types,
        top_level_functions,
    }
}

/// Method declarations with brace-balanced spans.
///
/// Java signatures and Kotlin `fun` declarations are recognized by pattern;
/// bodies of anonymous classes (`new T() { ... }`, `object : T { ... }`) are
/// not descended into.
pub fn extract_methods(source: &str, language: Language, diags: &mut Diagnostics) -> Vec<MethodSpan> {
    outline(source, language, diags).methods
}

/// Names of the types declared at the top level of a file.
pub fn extract_top_level_types(source: &str, language: Language) -> Vec<String> {
    outline(source, language, &mut Diagnostics::new()).top_level_types
}

/// Whether a Kotlin file declares functions outside any type.
pub fn has_top_level_functions(source: &str, language: Language) -> bool {
    outline(source, language, &mut Diagnostics::new()).top_level_functions
}
