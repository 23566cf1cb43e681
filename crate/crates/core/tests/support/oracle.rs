//! Brute-force slice oracle.
//!
//! Works from the two full snapshots only: changed files are found by
//! comparing the trees, every import and inline qualified name of both
//! images of a changed file is resolved against the snapshot indexes, and
//! the two dependency sets are set-differenced. No import-diff pairing,
//! wildcard reconciliation or reference guard is involved. Member usages
//! come from a separate, line-oriented taint pass.

use std::collections::{BTreeMap, BTreeSet};

use archslicer::lexical::{
    blank_literals, extract_imports, extract_methods, file_stem, is_class_source, is_keyword, strip_comments,
    ImportKind, Language, ModuleDescriptor,
};
use archslicer::pipeline::SnapshotModel;
use archslicer::report::ToolConfig;
use archslicer::resolver::{ClassIndex, ClassResolution};
use archslicer::slice::InstanceKey;
use archslicer::vcs::GitRepo;
use archslicer::Diagnostics;
use regex::Regex;

/// What the oracle expects of a commit's slice document.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OracleDoc {
    pub instances: BTreeSet<InstanceKey>,
    pub unsliced: BTreeSet<String>,
}

/// Target of one dependency: candidate modules (empty when external) and
/// class name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Target {
    modules: BTreeSet<String>,
    class: String,
}

#[derive(Debug, Clone, Copy, Default)]
struct Flags {
    /// Every contribution is a static-member import.
    static_only: bool,
    package_level: bool,
}

type Deps = BTreeMap<Target, Flags>;

fn add(deps: &mut Deps, target: Target, flags: Flags) {
    deps.entry(target)
        .and_modify(|f| f.static_only = f.static_only && flags.static_only)
        .or_insert(flags);
}

fn language(path: &str) -> Language {
    Language::of_path(path).unwrap_or(Language::Java)
}

fn is_header(line: &str) -> bool {
    let t = line.trim_start();
    t.starts_with("import ") || t.starts_with("package ") || t.starts_with("import\t") || t.starts_with("package\t")
}

/// Identifiers in code lines of an image.
fn code_names(source: &str) -> BTreeSet<String> {
    let word = Regex::new(r"[A-Za-z_$][\w$]*").unwrap();
    blank_literals(&strip_comments(source))
        .lines()
        .filter(|l| !is_header(l))
        .flat_map(|l| word.find_iter(l).map(|m| m.as_str().to_string()).collect::<Vec<_>>())
        .collect()
}

fn class_of(resolution: &ClassResolution, dotted: &str, index: &ClassIndex) -> String {
    if let ClassResolution::Resolved { qualified, .. } = resolution {
        if index.by_qualified_name.contains_key(qualified) {
            return qualified.rsplit('.').next().unwrap_or(qualified).to_string();
        }
    }
    let name = match resolution {
        ClassResolution::Resolved { qualified, .. } => qualified.as_str(),
        _ => dotted,
    };
    let segs: Vec<&str> = name.split('.').collect();
    segs.iter()
        .find(|s| s.starts_with(|c: char| c.is_ascii_uppercase()))
        .or(segs.last())
        .map(|s| s.to_string())
        .unwrap_or_default()
}

fn modules_of(resolution: &ClassResolution) -> BTreeSet<String> {
    match resolution {
        ClassResolution::Resolved { module, .. } => BTreeSet::from([module.clone()]),
        ClassResolution::Ambiguous { candidates } => candidates.clone(),
        ClassResolution::External => BTreeSet::new(),
    }
}

fn resolve(index: &ClassIndex, dotted: &str) -> Target {
    let r = index.resolve_qualified(dotted);
    Target {
        modules: modules_of(&r),
        class: class_of(&r, dotted, index),
    }
}

/// Every dependency an image expresses.
fn dependencies(source: &str, path: &str, index: &ClassIndex) -> Deps {
    let mut deps = Deps::new();
    let stripped = strip_comments(source);
    let names = code_names(source);
    for rec in extract_imports(&stripped, language(path), path, &mut Diagnostics::new()) {
        let is_static = rec.kind == ImportKind::StaticMember;
        let last = rec.segments.last().map(String::as_str);
        let upper = |s: &String| s.starts_with(|c: char| c.is_ascii_uppercase());
        let package_wildcard = last == Some("*") && !rec.segments.iter().any(upper);
        if package_wildcard {
            let package = rec.segments[..rec.segments.len() - 1].join(".");
            let used: Vec<String> = index
                .package_classes
                .get(&package)
                .into_iter()
                .flatten()
                .filter(|q| names.contains(q.rsplit('.').next().unwrap()))
                .cloned()
                .collect();
            if used.is_empty() {
                let r = index.resolve_package(&package);
                let flags = Flags {
                    static_only: false,
                    package_level: true,
                };
                add(
                    &mut deps,
                    Target {
                        modules: modules_of(&r),
                        class: format!("{package}.*"),
                    },
                    flags,
                );
            }
            for q in used {
                add(&mut deps, resolve(index, &q), Flags::default());
            }
            continue;
        }
        let dotted = if last == Some("*") {
            rec.segments[..rec.segments.len() - 1].join(".")
        } else {
            rec.segments.join(".")
        };
        add(
            &mut deps,
            resolve(index, &dotted),
            Flags {
                static_only: is_static,
                package_level: false,
            },
        );
    }
    let chain = Regex::new(r"[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)+").unwrap();
    for line in blank_literals(&stripped).lines().filter(|l| !is_header(l)) {
        for m in chain.find_iter(line) {
            if line[..m.start()].ends_with('.') || !m.as_str().starts_with(|c: char| c.is_ascii_lowercase()) {
                continue;
            }
            let segs: Vec<&str> = m.as_str().split('.').collect();
            let hit = (2..=segs.len())
                .rev()
                .map(|n| segs[..n].join("."))
                .find(|c| index.by_qualified_name.contains_key(c) || index.conflicting_qualified.contains_key(c));
            if let Some(q) = hit {
                add(&mut deps, resolve(index, &q), Flags::default());
            }
        }
    }
    deps
}

/// Methods of a comment-stripped image that use `class`, by a fixpoint
/// over names: statements that mention a tracked name bind the name they
/// assign or declare, methods whose signature mentions one become tracked.
fn taint(stripped: &str, lang: Language, class: &str) -> BTreeSet<String> {
    let blanked = blank_literals(stripped);
    let methods = extract_methods(stripped, lang, &mut Diagnostics::new());
    let word = Regex::new(r"[A-Za-z_$][\w$]*").unwrap();
    let words = |s: &str| -> Vec<String> { word.find_iter(s).map(|m| m.as_str().to_string()).collect() };
    let statements: Vec<&str> = blanked.split([';', '{', '}', '\n']).collect();
    let assign = Regex::new(r"^([^=!<>]*[^=!<>\s])\s*=([^=]|$)").unwrap();
    let kotlin_decl = Regex::new(r"\b(?:val|var)\s+([A-Za-z_$][\w$]*)").unwrap();
    let java_decl = Regex::new(r"[\w$>\]]\s+([A-Za-z_$][\w$]*)\s*$").unwrap();
    let ok = |w: &str| !is_keyword(w, lang) && !w.starts_with(|c: char| c.is_ascii_digit());

    let mut tracked = BTreeSet::from([class.to_string()]);
    loop {
        let size = tracked.len();
        for st in &statements {
            if !words(st).iter().any(|w| tracked.contains(w)) {
                continue;
            }
            let bound = if let Some(c) = assign.captures(st) {
                let lhs = c.get(1).unwrap().as_str();
                let lhs = if lang == Language::Kotlin {
                    lhs.split(':').next().unwrap()
                } else {
                    lhs
                };
                words(lhs).into_iter().rfind(|w| ok(w))
            } else if st.contains('(') {
                None
            } else if lang == Language::Kotlin {
                kotlin_decl.captures(st).map(|c| c[1].to_string())
            } else {
                let ws = words(st);
                let blocked = ws.len() >= 2
                    && matches!(
                        ws[ws.len() - 2].as_str(),
                        "package" | "import" | "return" | "throw" | "new"
                    );
                java_decl.captures(st).map(|c| c[1].to_string()).filter(|_| !blocked)
            };
            if let Some(b) = bound.filter(|b| ok(b)) {
                tracked.insert(b);
            }
        }
        for m in &methods {
            if words(&m.signature_text).iter().any(|w| tracked.contains(w)) {
                tracked.insert(m.name.clone());
            }
        }
        if tracked.len() == size {
            break;
        }
    }

    let mut users = BTreeSet::new();
    for (i, line) in blanked.lines().enumerate() {
        let n = i + 1;
        if !words(line).iter().any(|w| tracked.contains(w) && !is_keyword(w, lang)) {
            continue;
        }
        let inner = methods
            .iter()
            .enumerate()
            .filter(|(_, m)| m.start_line <= n && n <= m.end_line)
            .min_by_key(|(j, m)| (m.end_line - m.start_line, *j));
        if let Some((_, m)) = inner {
            users.insert(m.name.clone());
        }
    }
    for m in &methods {
        if words(&m.signature_text).iter().any(|w| tracked.contains(w)) {
            users.insert(m.name.clone());
        }
    }
    users
}

fn content_lines(source: &str) -> BTreeSet<String> {
    strip_comments(source)
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !is_header(l))
        .map(str::to_string)
        .collect()
}

fn jaccard(a: &str, b: &str) -> f64 {
    let (x, y) = (content_lines(a), content_lines(b));
    let union = x.union(&y).count();
    if union == 0 {
        1.0
    } else {
        x.intersection(&y).count() as f64 / union as f64
    }
}

enum Kind {
    Added,
    Deleted,
    Modified,
}

struct Change {
    kind: Kind,
    pre: Option<String>,
    post: Option<String>,
}

fn accepted(path: &str, config: &ToolConfig) -> bool {
    is_class_source(path) && config.accepts(language(path))
}

/// Class file changes from the two snapshots, with moves paired.
/// (module, old class) -> (module, new class) for same-module class renames.
type ClassRenames = BTreeMap<(String, String), (String, String)>;

fn changes(pre: &SnapshotModel, post: &SnapshotModel, config: &ToolConfig) -> (Vec<Change>, ClassRenames) {
    let src = |m: &SnapshotModel| -> BTreeMap<String, String> {
        m.sources
            .iter()
            .filter(|(p, _)| accepted(p, config))
            .map(|(p, t)| (p.clone(), t.clone()))
            .collect()
    };
    let (a, b) = (src(pre), src(post));
    let mut deleted: Vec<String> = a.keys().filter(|p| !b.contains_key(*p)).cloned().collect();
    let mut added: Vec<String> = b.keys().filter(|p| !a.contains_key(*p)).cloned().collect();
    let mut out: Vec<Change> = a
        .iter()
        .filter(|(p, t)| b.get(*p).is_some_and(|u| u != *t))
        .map(|(p, _)| Change {
            kind: Kind::Modified,
            pre: Some(p.clone()),
            post: Some(p.clone()),
        })
        .collect();

    let mut pairs = Vec::new();
    let mut take = |deleted: &mut Vec<String>, added: &mut Vec<String>, score: &dyn Fn(&str, &str) -> Option<f64>| {
        let mut i = 0;
        while i < deleted.len() {
            let best = added
                .iter()
                .enumerate()
                .filter_map(|(j, n)| score(&deleted[i], n).map(|s| (j, s)))
                .fold(None::<(usize, f64)>, |acc, (j, s)| match acc {
                    Some((_, t)) if t >= s => acc,
                    _ => Some((j, s)),
                });
            match best {
                Some((j, _)) => pairs.push((deleted.remove(i), added.remove(j))),
                None => i += 1,
            }
        }
    };
    let threshold = config.move_similarity_threshold;
    take(&mut deleted, &mut added, &|o, n| (a[o] == b[n]).then_some(1.0));
    take(&mut deleted, &mut added, &|o, n| {
        let s = jaccard(&a[o], &b[n]);
        (file_stem(o) == file_stem(n) && s >= threshold).then_some(s)
    });
    take(&mut deleted, &mut added, &|o, n| {
        let renamed = Regex::new(&format!(r"\b{}\b", regex::escape(file_stem(o))))
            .unwrap()
            .replace_all(&a[o], file_stem(n))
            .into_owned();
        let s = jaccard(&renamed, &b[n]);
        (file_stem(o) != file_stem(n) && s >= threshold).then_some(s)
    });

    let mut class_renames = BTreeMap::new();
    for (o, n) in pairs {
        let (mo, mn) = (pre.index.module_of_file(&o), post.index.module_of_file(&n));
        if mo.is_some() && mn.is_some() && mo != mn {
            out.push(Change {
                kind: Kind::Deleted,
                pre: Some(o),
                post: None,
            });
            out.push(Change {
                kind: Kind::Added,
                pre: None,
                post: Some(n),
            });
            continue;
        }
        if let Some(m) = mo.filter(|_| mo == mn && file_stem(&o) != file_stem(&n)) {
            class_renames.insert(
                (m.to_string(), file_stem(&o).to_string()),
                (m.to_string(), file_stem(&n).to_string()),
            );
        }
        out.push(Change {
            kind: Kind::Modified,
            pre: Some(o),
            post: Some(n),
        });
    }
    out.extend(deleted.into_iter().map(|p| Change {
        kind: Kind::Deleted,
        pre: Some(p),
        post: None,
    }));
    out.extend(added.into_iter().map(|p| Change {
        kind: Kind::Added,
        pre: None,
        post: Some(p),
    }));
    (out, class_renames)
}

/// Descriptor versions compared with each other: same path, else same
/// module name.
fn descriptor_pairs<'a>(
    pre: &'a SnapshotModel,
    post: &'a SnapshotModel,
) -> Vec<(Option<&'a ModuleDescriptor>, Option<&'a ModuleDescriptor>)> {
    let mut pairs = Vec::new();
    let mut lone_pre: Vec<&ModuleDescriptor> = Vec::new();
    for (path, d) in &pre.descriptors {
        match post.descriptors.get(path) {
            Some(e) => {
                if pre.sources.get(path) != post.sources.get(path) {
                    pairs.push((Some(d), Some(e)));
                }
            }
            None => lone_pre.push(d),
        }
    }
    for (path, e) in &post.descriptors {
        if pre.descriptors.contains_key(path) {
            continue;
        }
        match lone_pre.iter().position(|d| d.module_name == e.module_name) {
            Some(i) => pairs.push((Some(lone_pre.remove(i)), Some(e))),
            None => pairs.push((None, Some(e))),
        }
    }
    pairs.extend(lone_pre.into_iter().map(|d| (Some(d), None)));
    pairs
}

/// (op family, target) -> (op, qualifier).
type DirectiveTable = BTreeMap<(String, String), (String, Option<Vec<String>>)>;

fn descriptor_instances(pre: &SnapshotModel, post: &SnapshotModel, out: &mut BTreeSet<InstanceKey>) {
    for (a, b) in descriptor_pairs(pre, post) {
        let Some(module) = b.or(a).map(|d| d.module_name.clone()) else {
            continue;
        };
        let table = |d: Option<&ModuleDescriptor>| -> DirectiveTable {
            d.map(|d| {
                d.directives
                    .iter()
                    .map(|x| {
                        let op = x.op.as_str().to_string();
                        let family = op.trim_end_matches("_transitive").to_string();
                        ((family, x.target.clone()), (op, x.qualifier.clone()))
                    })
                    .collect()
            })
            .unwrap_or_default()
        };
        let (before, after) = (table(a), table(b));
        let mut changed: Vec<(String, String, Option<Vec<String>>, bool)> = Vec::new();
        for (key, val) in &before {
            match after.get(key) {
                None => changed.push((val.0.clone(), key.1.clone(), val.1.clone(), false)),
                Some(v) if v != val => changed.push((v.0.clone(), key.1.clone(), v.1.clone(), true)),
                Some(_) => {}
            }
        }
        for (key, val) in &after {
            if !before.contains_key(key) {
                changed.push((val.0.clone(), key.1.clone(), val.1.clone(), true));
            }
        }
        if let (Some(x), Some(y)) = (a, b) {
            if x.is_open != y.is_open {
                changed.push(("open".into(), module.clone(), None, y.is_open));
            }
            if x.module_name != y.module_name {
                changed.push(("module".into(), y.module_name.clone(), None, true));
            }
        }
        for (op, target, qualifier, connected) in changed {
            let index = if connected { &post.index } else { &pre.index };
            let qualified_to = qualifier.filter(|q| !q.is_empty() && matches!(op.as_str(), "exports" | "opens"));
            let targets: Vec<String> = match qualified_to {
                Some(to) => to,
                None if matches!(op.as_str(), "uses" | "provides") => {
                    vec![modules_of(&index.resolve_qualified(&target))
                        .into_iter()
                        .next()
                        .unwrap_or(target.clone())]
                }
                None => vec![target.clone()],
            };
            for t in targets {
                out.insert((
                    module.clone(),
                    "module-info".into(),
                    format!("MO({op},{target})"),
                    t,
                    String::new(),
                ));
            }
        }
    }
}

/// Expected instances and unsliced class files of the commit `rev`,
/// assumed to be M2M.
pub fn oracle(git: &GitRepo, rev: &str, config: &ToolConfig) -> OracleDoc {
    let commit = git.commit(rev).expect("commit");
    let snapshot = |r: Option<&str>| match r {
        Some(r) => git.snapshot(Some(r)).expect("snapshot"),
        None => Default::default(),
    };
    let pre = SnapshotModel::build(snapshot(commit.parent_id.as_deref()), config);
    let post = SnapshotModel::build(snapshot(Some(&commit.commit_id)), config);

    let mut doc = OracleDoc::default();
    descriptor_instances(&pre, &post, &mut doc.instances);

    let (changes, class_renames) = changes(&pre, &post, config);
    let canon = |t: &Target| -> Target {
        if t.modules.len() == 1 {
            let m = t.modules.iter().next().unwrap().clone();
            if let Some((nm, nc)) = class_renames.get(&(m, t.class.clone())) {
                return Target {
                    modules: BTreeSet::from([nm.clone()]),
                    class: nc.clone(),
                };
            }
        }
        t.clone()
    };
    for change in changes {
        let pre_deps = change
            .pre
            .as_ref()
            .map(|p| dependencies(&pre.sources[p], p, &pre.index));
        let post_deps = change
            .post
            .as_ref()
            .map(|p| dependencies(&post.sources[p], p, &post.index));
        let (connected, disconnected): (Deps, Deps) = match change.kind {
            Kind::Added => (post_deps.unwrap(), Deps::new()),
            Kind::Deleted => (Deps::new(), pre_deps.unwrap()),
            Kind::Modified => {
                let (a, b) = (pre_deps.unwrap(), post_deps.unwrap());
                let a_canon: BTreeSet<Target> = a.keys().map(&canon).collect();
                let gained = b
                    .iter()
                    .filter(|(t, _)| !a_canon.contains(*t))
                    .map(|(t, f)| (t.clone(), *f))
                    .collect();
                let lost = a
                    .iter()
                    .filter(|(t, _)| !b.contains_key(&canon(t)))
                    .map(|(t, f)| (t.clone(), *f))
                    .collect();
                (gained, lost)
            }
        };
        let mut sliced = false;
        let mut emit = |path: &str, model: &SnapshotModel, deps: &Deps| {
            let Some(module) = model.index.module_of_file(path) else {
                return;
            };
            let stripped = strip_comments(&model.sources[path]);
            for (target, flags) in deps {
                let members = if flags.static_only || flags.package_level {
                    BTreeSet::new()
                } else {
                    taint(&stripped, language(path), &target.class)
                };
                for tm in target.modules.iter().filter(|m| *m != module) {
                    sliced = true;
                    let key = |member: &str| {
                        (
                            module.to_string(),
                            file_stem(path).to_string(),
                            member.to_string(),
                            tm.clone(),
                            target.class.clone(),
                        )
                    };
                    if members.is_empty() {
                        doc.instances.insert(key(""));
                    }
                    for m in &members {
                        doc.instances.insert(key(m));
                    }
                }
            }
        };
        if let Some(p) = &change.post {
            emit(p, &post, &connected);
        }
        if let Some(p) = &change.pre {
            emit(p, &pre, &disconnected);
        }
        if !sliced {
            doc.unsliced.insert(change.post.or(change.pre).unwrap());
        }
    }
    doc
}
