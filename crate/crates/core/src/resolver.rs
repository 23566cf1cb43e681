//! Module layouts and the qualified-class -> module index of one snapshot.

use std::collections::{BTreeMap, BTreeSet};

use crate::diag::{Diagnostic, Diagnostics};
use crate::lexical::{
    extract_package, extract_top_level_types, file_stem, has_top_level_functions, is_class_source, strip_comments,
    ImportKind, ImportRecord, Language, ModuleDescriptor,
};

/// Source-root layouts recognized out of the box, relative to a module root.
pub const DEFAULT_LAYOUTS: &[&str] = &["src/main/java", "src/main/kotlin", "main/java", "src"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleLayout {
    pub module_name: String,
    /// Repo-relative module directory; empty for a module at the repo root.
    pub root_dir: String,
    pub source_roots: Vec<String>,
    pub descriptor_path: String,
    /// Layout pattern that placed the descriptor, `None` for the fallback.
    pub pattern: Option<String>,
}

/// Segment-wise directory containment: `app-core/x` is not under `app`.
pub fn is_under(path: &str, dir: &str) -> bool {
    dir.is_empty() || path == dir || (path.starts_with(dir) && path.as_bytes().get(dir.len()) == Some(&b'/'))
}

fn join(dir: &str, rest: &str) -> String {
    match (dir.is_empty(), rest.is_empty()) {
        (true, _) => rest.to_string(),
        (_, true) => dir.to_string(),
        _ => format!("{dir}/{rest}"),
    }
}

fn parent_dir(path: &str) -> &str {
    path.rsplit_once('/').map_or("", |(d, _)| d)
}

/// Checks a layout pattern: relative, non-empty segments, no `..`, `*`
/// only as a whole segment.
pub fn validate_layout_pattern(pattern: &str) -> Result<(), String> {
    if pattern.is_empty() || pattern.starts_with('/') || pattern.ends_with('/') {
        return Err(format!("layout pattern '{pattern}' must be a relative directory path"));
    }
    for seg in pattern.split('/') {
        if seg.is_empty() || seg == "." || seg == ".." {
            return Err(format!("layout pattern '{pattern}' has an invalid segment '{seg}'"));
        }
        if seg.contains('*') && seg != "*" {
            return Err(format!("layout pattern '{pattern}': '*' must be a whole segment"));
        }
    }
    Ok(())
}

/// If `dir` ends with `pattern` (segment-wise, `*` matches one segment),
/// returns the module root in front of it and the concrete matched suffix.
fn match_suffix(dir: &str, pattern: &str) -> Option<(String, String)> {
    let dsegs: Vec<&str> = if dir.is_empty() {
        Vec::new()
    } else {
        dir.split('/').collect()
    };
    let psegs: Vec<&str> = pattern.split('/').collect();
    if psegs.len() > dsegs.len() {
        return None;
    }
    let tail = &dsegs[dsegs.len() - psegs.len()..];
    if tail.iter().zip(&psegs).all(|(d, p)| *p == "*" || d == p) {
        Some((dsegs[..dsegs.len() - psegs.len()].join("/"), tail.join("/")))
    } else {
        None
    }
}

/// One layout per descriptor.
///
/// The descriptor's directory is matched against every pattern (defaults
/// followed by `extra_layouts`); the longest match wins and fixes the module
/// root. Other pattern directories under that root holding files become
/// additional source roots. A descriptor matching nothing gets its own
/// directory as root, with a diagnostic.
pub fn discover_modules(
    listing: &[String],
    descriptors: &BTreeMap<String, ModuleDescriptor>,
    extra_layouts: &[String],
    diags: &mut Diagnostics,
) -> Vec<ModuleLayout> {
    let patterns: Vec<&str> = DEFAULT_LAYOUTS
        .iter()
        .copied()
        .chain(extra_layouts.iter().map(String::as_str))
        .collect();
    let mut layouts = Vec::new();
    for (path, descriptor) in descriptors {
        let dir = parent_dir(path);
        let best = patterns
            .iter()
            .filter_map(|p| match_suffix(dir, p).map(|(root, matched)| (p, root, matched)))
            .max_by_key(|(p, _, _)| {
                (
                    p.split('/').count(),
                    std::cmp::Reverse(patterns.iter().position(|q| q == *p)),
                )
            });
        let layout = match best {
            Some((pattern, root, _)) => {
                let mut roots: BTreeSet<String> = BTreeSet::new();
                roots.insert(dir.to_string());
                for p in &patterns {
                    if p.contains('*') {
                        continue;
                    }
                    let candidate = join(&root, p);
                    if listing
                        .iter()
                        .any(|f| f != path && is_under(f, &candidate) && f != &candidate)
                    {
                        roots.insert(candidate);
                    }
                }
                // drop roots that merely contain a deeper root of the same module
                let all: Vec<String> = roots.iter().cloned().collect();
                let source_roots = all
                    .iter()
                    .filter(|r| !all.iter().any(|o| o != *r && is_under(o, r)))
                    .cloned()
                    .collect();
                ModuleLayout {
                    module_name: descriptor.module_name.clone(),
                    root_dir: root,
                    source_roots,
                    descriptor_path: path.clone(),
                    pattern: Some(pattern.to_string()),
                }
            }
            None => {
                diags.push(
                    Diagnostic::new("unknown-layout", "descriptor directory matches no layout pattern")
                        .in_file(path.clone()),
                );
                ModuleLayout {
                    module_name: descriptor.module_name.clone(),
                    root_dir: dir.to_string(),
                    source_roots: vec![dir.to_string()],
                    descriptor_path: path.clone(),
                    pattern: None,
                }
            }
        };
        layouts.push(layout);
    }
    layouts
}

/// Module whose root directory is the longest segment-wise prefix of `path`.
pub fn resolve_module_of_path<'a>(layouts: &'a [ModuleLayout], path: &str) -> Option<&'a ModuleLayout> {
    layouts.iter().filter(|l| is_under(path, &l.root_dir)).max_by(|a, b| {
        a.root_dir
            .len()
            .cmp(&b.root_dir.len())
            .then_with(|| b.module_name.cmp(&a.module_name))
    })
}

/// Per-file facts the index needs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FileFacts {
    pub package: Option<String>,
    /// Type names the file contributes to the index.
    pub class_names: Vec<String>,
}

impl FileFacts {
    /// Java files contribute their stem; Kotlin files their top-level types,
    /// plus a synthetic type named after the stem when they declare
    /// top-level functions (or no types at all).
    pub fn from_source(path: &str, source: &str) -> FileFacts {
        let stripped = strip_comments(source);
        let package = extract_package(&stripped, &mut Diagnostics::new());
        let stem = file_stem(path).to_string();
        let class_names = match Language::of_path(path) {
            Some(Language::Kotlin) => {
                let mut names = extract_top_level_types(&stripped, Language::Kotlin);
                if names.is_empty() || has_top_level_functions(&stripped, Language::Kotlin) {
                    names.push(stem);
                }
                names.sort();
                names.dedup();
                names
            }
            _ => vec![stem],
        };
        FileFacts { package, class_names }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEntry {
    pub module: String,
    pub path: String,
    /// Package declaration agrees with the directory below the source root.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PackageOwner {
    Module(String),
    Ambiguous(BTreeSet<String>),
}

#[derive(Debug, Clone, Default)]
pub struct ClassIndex {
    pub by_qualified_name: BTreeMap<String, ClassEntry>,
    /// Qualified names defined in more than one module.
    pub conflicting_qualified: BTreeMap<String, BTreeSet<String>>,
    pub ambiguous_simple_names: BTreeMap<String, BTreeSet<String>>,
    pub package_to_module: BTreeMap<String, PackageOwner>,
    pub package_classes: BTreeMap<String, BTreeSet<String>>,
    pub simple_names: BTreeMap<String, BTreeSet<String>>,
    pub module_names: BTreeSet<String>,
    /// Source file -> owning module.
    pub file_modules: BTreeMap<String, String>,
    pub orphans: Vec<String>,
    pub layouts: Vec<ModuleLayout>,
}

/// Which evidence rule placed a class in a module.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ResolutionRule {
    Qualified,
    ExplicitImport,
    WildcardImport,
    SamePackage,
    PackageOwner,
    DeclaredModuleName,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ClassResolution {
    Resolved {
        module: String,
        qualified: String,
        rule: ResolutionRule,
    },
    /// No rule fired, or several modules qualify.
    Ambiguous { candidates: BTreeSet<String> },
    /// A qualified name that lives outside the repository.
    External,
}

impl ClassResolution {
    pub fn module(&self) -> Option<&str> {
        match self {
            ClassResolution::Resolved { module, .. } => Some(module),
            _ => None,
        }
    }
}

/// Package and imports of the file a name is referenced from.
#[derive(Debug, Clone, Default)]
pub struct FileContext {
    pub package: Option<String>,
    pub imports: Vec<ImportRecord>,
}

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

/// Indexes every Java/Kotlin file that lies under a source root of its
/// owning module.
pub fn build_class_index(
    layouts: &[ModuleLayout],
    listing: &[String],
    facts: &BTreeMap<String, FileFacts>,
) -> ClassIndex {
    let mut index = ClassIndex {
        module_names: layouts.iter().map(|l| l.module_name.clone()).collect(),
        layouts: layouts.to_vec(),
        ..ClassIndex::default()
    };
    let mut package_modules: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();

    for path in listing.iter().filter(|p| is_class_source(p)) {
        let Some(layout) = resolve_module_of_path(layouts, path) else {
            index.orphans.push(path.clone());
            continue;
        };
        let Some(root) = layout
            .source_roots
            .iter()
            .filter(|r| is_under(path, r))
            .max_by_key(|r| r.len())
        else {
            index.orphans.push(path.clone());
            continue;
        };
        let file_facts = facts.get(path).cloned().unwrap_or_else(|| FileFacts {
            package: None,
            class_names: vec![file_stem(path).to_string()],
        });
        let package = file_facts.package.clone().unwrap_or_default();
        let rel_dir = parent_dir(path)
            .strip_prefix(root.as_str())
            .unwrap_or("")
            .trim_start_matches('/');
        let consistent = rel_dir == package.replace('.', "/");
        let module = layout.module_name.clone();
        index.file_modules.insert(path.clone(), module.clone());
        package_modules
            .entry(package.clone())
            .or_default()
            .insert(module.clone());

        for class in &file_facts.class_names {
            let qualified = if package.is_empty() {
                class.clone()
            } else {
                format!("{package}.{class}")
            };
            index
                .simple_names
                .entry(class.clone())
                .or_default()
                .insert(module.clone());
            index
                .package_classes
                .entry(package.clone())
                .or_default()
                .insert(qualified.clone());
            match index.by_qualified_name.get(&qualified) {
                Some(existing) if existing.module != module => {
                    let set = index.conflicting_qualified.entry(qualified.clone()).or_default();
                    set.insert(existing.module.clone());
                    set.insert(module.clone());
                }
                Some(_) => {}
                None => {
                    index.by_qualified_name.insert(
                        qualified,
                        ClassEntry {
                            module: module.clone(),
                            path: path.clone(),
                            consistent,
                        },
                    );
                }
            }
        }
    }

    index.ambiguous_simple_names = index
        .simple_names
        .iter()
        .filter(|(_, mods)| mods.len() >= 2)
        .map(|(n, m)| (n.clone(), m.clone()))
        .collect();
    index.package_to_module = package_modules
        .into_iter()
        .filter(|(p, _)| !p.is_empty())
        .map(|(p, mods)| {
            let owner = if mods.len() == 1 {
                PackageOwner::Module(mods.into_iter().next().unwrap())
            } else {
                PackageOwner::Ambiguous(mods)
            };
            (p, owner)
        })
        .collect();
    index
}

impl ClassIndex {
    pub fn module_of_file(&self, path: &str) -> Option<&str> {
        self.file_modules.get(path).map(String::as_str)
    }

    /// Module of any repo path by deepest module root, indexed or not.
    pub fn module_of_path(&self, path: &str) -> Option<&str> {
        resolve_module_of_path(&self.layouts, path).map(|l| l.module_name.as_str())
    }

    pub fn layout_of(&self, module: &str) -> Option<&ModuleLayout> {
        self.layouts.iter().find(|l| l.module_name == module)
    }

    fn lookup_exact(&self, qualified: &str) -> Option<ClassResolution> {
        if let Some(mods) = self.conflicting_qualified.get(qualified) {
            return Some(ClassResolution::Ambiguous {
                candidates: mods.clone(),
            });
        }
        self.by_qualified_name
            .get(qualified)
            .map(|e| ClassResolution::Resolved {
                module: e.module.clone(),
                qualified: qualified.to_string(),
                rule: ResolutionRule::Qualified,
            })
    }

    fn package_owner(&self, package: &str, qualified: &str) -> Option<ClassResolution> {
        match self.package_to_module.get(package)? {
            PackageOwner::Module(m) => Some(ClassResolution::Resolved {
                module: m.clone(),
                qualified: qualified.to_string(),
                rule: ResolutionRule::PackageOwner,
            }),
            PackageOwner::Ambiguous(mods) => Some(ClassResolution::Ambiguous {
                candidates: mods.clone(),
            }),
        }
    }

    /// A dotted path that starts with (or equals) a declared module name,
    /// for modules whose name does not mirror their directories.
    fn declared_module(&self, dotted: &str) -> Option<ClassResolution> {
        self.module_names
            .iter()
            .filter(|m| dotted == m.as_str() || dotted.starts_with(&format!("{m}.")))
            .max_by_key(|m| m.len())
            .map(|m| ClassResolution::Resolved {
                module: m.clone(),
                qualified: dotted.to_string(),
                rule: ResolutionRule::DeclaredModuleName,
            })
    }

    /// Resolves a fully qualified class path (inner classes and static
    /// members allowed after the class).
    pub fn resolve_qualified(&self, dotted: &str) -> ClassResolution {
        let segs: Vec<&str> = dotted.split('.').collect();
        for len in (1..=segs.len()).rev() {
            if let Some(r) = self.lookup_exact(&segs[..len].join(".")) {
                return r;
            }
        }
        let pkg_len = segs
            .iter()
            .position(|s| starts_upper(s))
            .unwrap_or(segs.len().saturating_sub(1));
        if pkg_len > 0 {
            if let Some(r) = self.package_owner(&segs[..pkg_len].join("."), dotted) {
                return r;
            }
        }
        self.declared_module(dotted).unwrap_or(ClassResolution::External)
    }

    /// Resolves a package named by a wildcard import.
    pub fn resolve_package(&self, package: &str) -> ClassResolution {
        self.package_owner(package, package)
            .or_else(|| self.declared_module(package))
            .unwrap_or(ClassResolution::External)
    }

    /// Qualified names of the indexed classes of a package.
    pub fn classes_of_package(&self, package: &str) -> Vec<&str> {
        self.package_classes
            .get(package)
            .map(|s| s.iter().map(String::as_str).collect())
            .unwrap_or_default()
    }
}

/// Resolves a class name as referenced from a file.
///
/// Qualified names go through the index directly. Simple names are tried
/// against (1) an explicit import, (2) wildcard-imported packages, then
/// (3) same-package siblings. Anything else is an ambiguity verdict.
pub fn resolve_class_module(index: &ClassIndex, name: &str, ctx: &FileContext) -> ClassResolution {
    if name.contains('.') {
        return index.resolve_qualified(name);
    }
    let explicit = ctx
        .imports
        .iter()
        .find(|imp| imp.kind != ImportKind::Wildcard && imp.class_path().is_some_and(|cp| cp.last() == Some(&name)));
    if let Some(imp) = explicit {
        let cp = imp.class_path().unwrap_or_default().join(".");
        return match index.resolve_qualified(&cp) {
            ClassResolution::Resolved { module, qualified, .. } => ClassResolution::Resolved {
                module,
                qualified,
                rule: ResolutionRule::ExplicitImport,
            },
            other => other,
        };
    }

    let mut wildcard_hits: BTreeMap<String, String> = BTreeMap::new();
    for imp in ctx.imports.iter().filter(|i| i.kind == ImportKind::Wildcard) {
        let base = imp.segments[..imp.segments.len() - 1].join(".");
        let qualified = format!("{base}.{name}");
        if let Some(ClassResolution::Resolved { module, .. }) = index.lookup_exact(&qualified) {
            wildcard_hits.insert(module, qualified);
        }
    }
    match wildcard_hits.len() {
        0 => {}
        1 => {
            let (module, qualified) = wildcard_hits.into_iter().next().unwrap();
            return ClassResolution::Resolved {
                module,
                qualified,
                rule: ResolutionRule::WildcardImport,
            };
        }
        _ => {
            return ClassResolution::Ambiguous {
                candidates: wildcard_hits.into_keys().collect(),
            }
        }
    }

    let sibling = match &ctx.package {
        Some(p) if !p.is_empty() => format!("{p}.{name}"),
        _ => name.to_string(),
    };
    if let Some(r) = index.lookup_exact(&sibling) {
        return match r {
            ClassResolution::Resolved { module, qualified, .. } => ClassResolution::Resolved {
                module,
                qualified,
                rule: ResolutionRule::SamePackage,
            },
            other => other,
        };
    }
    ClassResolution::Ambiguous {
        candidates: index.simple_names.get(name).cloned().unwrap_or_default(),
    }
}
