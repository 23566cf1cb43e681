use super::is_identifier;
use crate::diag::{Diagnostic, Diagnostics};

/// Dotted name of the package declaration, `None` for the default package.
///
/// Works for Java (`package a.b;`) and Kotlin (`package a.b`). When several
/// declarations are present the first one wins.
pub fn extract_package(source: &str, diags: &mut Diagnostics) -> Option<String> {
    let mut found: Option<String> = None;
    for (idx, line) in source.lines().enumerate() {
        let Some(rest) = line.trim_start().strip_prefix("package") else {
            continue;
        };
        if !rest.starts_with(char::is_whitespace) {
            continue;
        }
        let name: String = rest
            .split(';')
            .next()
            .unwrap_or("")
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '`')
            .collect();
        if name.is_empty() || !name.split('.').all(is_identifier) {
            diags
                .push(Diagnostic::new("malformed-package", format!("cannot parse '{}'", line.trim())).at_line(idx + 1));
            continue;
        }
        if found.is_some() {
            diags.push(
                Diagnostic::new("multiple-packages", format!("ignoring extra declaration '{name}'")).at_line(idx + 1),
            );
        } else {
            found = Some(name);
        }
    }
    found
}
