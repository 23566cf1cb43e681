use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, Diagnostics};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectiveOp {
    Requires,
    RequiresTransitive,
    Exports,
    Opens,
    Provides,
    Uses,
}

impl DirectiveOp {
    pub fn as_str(self) -> &'static str {
        match self {
            DirectiveOp::Requires => "requires",
            DirectiveOp::RequiresTransitive => "requires_transitive",
            DirectiveOp::Exports => "exports",
            DirectiveOp::Opens => "opens",
            DirectiveOp::Provides => "provides",
            DirectiveOp::Uses => "uses",
        }
    }

    /// `requires` and `requires transitive` on the same target are one
    /// relation whose strength changed.
    pub fn family(self) -> DirectiveOp {
        match self {
            DirectiveOp::RequiresTransitive => DirectiveOp::Requires,
            other => other,
        }
    }
}

impl fmt::Display for DirectiveOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Directive {
    pub op: DirectiveOp,
    pub target: String,
    /// `to` modules of exports/opens, `with` classes of provides.
    pub qualifier: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleDescriptor {
    pub module_name: String,
    pub is_open: bool,
    pub directives: Vec<Directive>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Name(String),
    Semi,
    Comma,
    LBrace,
    RBrace,
    LParen,
    RParen,
    At,
    Other,
}

fn tokenize(src: &str) -> Vec<Tok> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == '_' || c == '$' {
            // dotted names are one token; whitespace around dots is allowed
            let mut name = String::new();
            loop {
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                    name.push(chars[i]);
                    i += 1;
                }
                let mut j = i;
                while j < chars.len() && chars[j].is_whitespace() {
                    j += 1;
                }
                if j < chars.len() && chars[j] == '.' {
                    let mut k = j + 1;
                    while k < chars.len() && chars[k].is_whitespace() {
                        k += 1;
                    }
                    if k < chars.len()
                        && (chars[k].is_ascii_alphabetic() || chars[k] == '_' || chars[k] == '$' || chars[k] == '*')
                    {
                        name.push('.');
                        if chars[k] == '*' {
                            name.push('*');
                            i = k + 1;
                            break;
                        }
                        i = k;
                        continue;
                    }
                }
                break;
            }
            toks.push(Tok::Name(name));
        } else {
            toks.push(match c {
                ';' => Tok::Semi,
                ',' => Tok::Comma,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '@' => Tok::At,
                _ => Tok::Other,
            });
            i += 1;
        }
    }
    toks
}

struct Cursor {
    toks: Vec<Tok>,
    pos: usize,
}

impl Cursor {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek_name(&self) -> Option<&str> {
        match self.peek() {
            Some(Tok::Name(n)) => Some(n),
            _ => None,
        }
    }

    fn skip_to_semi(&mut self) {
        while let Some(t) = self.next() {
            if t == Tok::Semi || t == Tok::RBrace {
                if t == Tok::RBrace {
                    self.pos -= 1;
                }
                return;
            }
        }
    }

    fn skip_annotation(&mut self) {
        // after '@': name, optional balanced parens
        self.next();
        if self.peek() == Some(&Tok::LParen) {
            let mut depth = 0;
            while let Some(t) = self.next() {
                match t {
                    Tok::LParen => depth += 1,
                    Tok::RParen => {
                        depth -= 1;
                        if depth == 0 {
                            break;
                        }
                    }
                    _ => {}
                }
            }
        }
    }

    fn name_list(&mut self) -> Vec<String> {
        let mut names = Vec::new();
        while let Some(Tok::Name(n)) = self.peek().cloned() {
            names.push(n);
            self.next();
            if self.peek() == Some(&Tok::Comma) {
                self.next();
            } else {
                break;
            }
        }
        names
    }
}

/// Parses a comment-stripped `module-info.java`.
pub fn parse_module_descriptor(source: &str) -> Result<ModuleDescriptor> {
    parse_module_descriptor_reporting(source, &mut Diagnostics::new())
}

/// [`parse_module_descriptor`], reporting directives that could not be read.
pub fn parse_module_descriptor_reporting(source: &str, diags: &mut Diagnostics) -> Result<ModuleDescriptor> {
    let mut cur = Cursor {
        toks: tokenize(source),
        pos: 0,
    };
    let mut is_open = false;
    loop {
        match cur.peek() {
            None => return Err(Error::NotADescriptor),
            Some(Tok::At) => {
                cur.next();
                cur.skip_annotation();
            }
            Some(Tok::Name(n)) if n == "import" => cur.skip_to_semi(),
            Some(Tok::Name(n)) if n == "open" => {
                is_open = true;
                cur.next();
            }
            Some(Tok::Name(n)) if n == "module" => {
                cur.next();
                break;
            }
            _ => {
                cur.next();
            }
        }
    }
    let module_name = match cur.next() {
        Some(Tok::Name(n)) if !n.ends_with('*') => n,
        _ => return Err(Error::NotADescriptor),
    };
    if cur.next() != Some(Tok::LBrace) {
        return Err(Error::NotADescriptor);
    }

    let mut directives = Vec::new();
    while let Some(tok) = cur.next() {
        let keyword = match tok {
            Tok::RBrace => break,
            Tok::Semi => continue,
            Tok::Name(n) => n,
            other => {
                diags.push(Diagnostic::new("bad-directive", format!("unexpected token {other:?}")));
                cur.skip_to_semi();
                continue;
            }
        };
        let directive = match keyword.as_str() {
            "requires" => {
                let mut transitive = false;
                // modifiers, unless the modifier word is itself the module name
                while let Some(n) = cur.peek_name() {
                    let is_modifier =
                        (n == "transitive" || n == "static") && matches!(cur.toks.get(cur.pos + 1), Some(Tok::Name(_)));
                    if !is_modifier {
                        break;
                    }
                    transitive |= n == "transitive";
                    cur.next();
                }
                cur.peek_name().map(str::to_string).map(|target| {
                    cur.next();
                    Directive {
                        op: if transitive {
                            DirectiveOp::RequiresTransitive
                        } else {
                            DirectiveOp::Requires
                        },
                        target,
                        qualifier: None,
                    }
                })
            }
            "exports" | "opens" => cur.peek_name().map(str::to_string).map(|target| {
                cur.next();
                let qualifier = if cur.peek_name() == Some("to") {
                    cur.next();
                    Some(cur.name_list())
                } else {
                    None
                };
                Directive {
                    op: if keyword == "exports" {
                        DirectiveOp::Exports
                    } else {
                        DirectiveOp::Opens
                    },
                    target,
                    qualifier,
                }
            }),
            "uses" => cur.peek_name().map(str::to_string).map(|target| {
                cur.next();
                Directive {
                    op: DirectiveOp::Uses,
                    target,
                    qualifier: None,
                }
            }),
            "provides" => cur.peek_name().map(str::to_string).and_then(|target| {
                cur.next();
                if cur.peek_name() != Some("with") {
                    return None;
                }
                cur.next();
                let impls = cur.name_list();
                (!impls.is_empty()).then_some(Directive {
                    op: DirectiveOp::Provides,
                    target,
                    qualifier: Some(impls),
                })
            }),
            _ => None,
        };
        match directive {
            Some(d) if cur.peek() == Some(&Tok::Semi) => {
                cur.next();
                directives.push(d);
            }
            _ => {
                diags.push(Diagnostic::new(
                    "bad-directive",
                    format!("cannot parse '{keyword}' directive"),
                ));
                cur.skip_to_semi();
            }
        }
    }

    Ok(ModuleDescriptor {
        module_name,
        is_open,
        directives,
    })
}
