use crate::diag::{Diagnostic, Diagnostics};

#[derive(Clone, Copy, PartialEq, Eq)]
enum State {
    Code,
    LineComment,
    BlockComment,
    Str,
    TextBlock,
    Char,
}

/// Single pass over the source. Comments are blanked when `blank_comments`,
/// literal contents (between the quotes) are blanked when `blank_literal_bodies`.
/// Newlines are always kept so every surviving token keeps its line number.
fn scan(source: &str, blank_comments: bool, blank_literal_bodies: bool, diags: &mut Diagnostics) -> String {
    let chars: Vec<char> = source.chars().collect();
    let mut out = String::with_capacity(source.len());
    let mut state = State::Code;
    let mut line = 1;
    let mut block_start = 0;
    let mut i = 0;

    let hide = |out: &mut String, c: char, blank: bool| {
        if c == '\n' || c == '\r' || !blank {
            out.push(c);
        } else {
            out.push(' ');
        }
    };

    while i < chars.len() {
        let c = chars[i];
        let next = chars.get(i + 1).copied();
        match state {
            State::Code => match c {
                '/' if next == Some('/') => {
                    state = State::LineComment;
                    hide(&mut out, c, blank_comments);
                    hide(&mut out, '/', blank_comments);
                    i += 2;
                    continue;
                }
                '/' if next == Some('*') => {
                    state = State::BlockComment;
                    block_start = line;
                    hide(&mut out, c, blank_comments);
                    hide(&mut out, '*', blank_comments);
                    i += 2;
                    continue;
                }
                '"' if next == Some('"') && chars.get(i + 2) == Some(&'"') => {
                    state = State::TextBlock;
                    out.push_str("\"\"\"");
                    i += 3;
                    continue;
                }
                '"' => {
                    state = State::Str;
                    out.push(c);
                }
                '\'' => {
                    state = State::Char;
                    out.push(c);
                }
                _ => out.push(c),
            },
            State::LineComment => {
                if c == '\n' {
                    state = State::Code;
                }
                hide(&mut out, c, blank_comments);
            }
            State::BlockComment => {
                if c == '*' && next == Some('/') {
                    hide(&mut out, c, blank_comments);
                    hide(&mut out, '/', blank_comments);
                    state = State::Code;
                    i += 2;
                    continue;
                }
                hide(&mut out, c, blank_comments);
            }
            State::Str | State::Char => {
                let quote = if state == State::Str { '"' } else { '\'' };
                if c == '\\' {
                    hide(&mut out, c, blank_literal_bodies);
                    if let Some(n) = next {
                        hide(&mut out, n, blank_literal_bodies);
                        if n == '\n' {
                            line += 1;
                        }
                    }
                    i += 2;
                    continue;
                }
                if c == quote || c == '\n' {
                    // unterminated literals end at the line break
                    state = State::Code;
                    out.push(c);
                } else {
                    hide(&mut out, c, blank_literal_bodies);
                }
            }
            State::TextBlock => {
                if c == '"' && next == Some('"') && chars.get(i + 2) == Some(&'"') {
                    out.push_str("\"\"\"");
                    state = State::Code;
                    i += 3;
                    continue;
                }
                if c == '\\' {
                    hide(&mut out, c, blank_literal_bodies);
                    if let Some(n) = next {
                        hide(&mut out, n, blank_literal_bodies);
                        if n == '\n' {
                            line += 1;
                        }
                    }
                    i += 2;
                    continue;
                }
                hide(&mut out, c, blank_literal_bodies);
            }
        }
        if c == '\n' {
            line += 1;
        }
        i += 1;
    }

    if state == State::BlockComment && blank_comments {
        diags.push(
            Diagnostic::new(
                "unterminated-comment",
                "block comment is not closed; stripped to end of file",
            )
            .at_line(block_start),
        );
    }
    out
}

/// Replaces `/* */` and `//` comments with spaces.
///
/// Line breaks are kept, so the output has the same line count as the input
/// and every surviving token stays on its original line. String, character
/// and text-block literals are left untouched.
pub fn strip_comments(source: &str) -> String {
    strip_comments_reporting(source, &mut Diagnostics::new())
}

/// [`strip_comments`], reporting an unterminated block comment.
pub fn strip_comments_reporting(source: &str, diags: &mut Diagnostics) -> String {
    scan(source, true, false, diags)
}

/// Blanks the contents of string and character literals (quotes kept) and
/// all comments, so brace counting and identifier search see only code.
pub fn blank_literals(source: &str) -> String {
    scan(source, true, true, &mut Diagnostics::new())
}
