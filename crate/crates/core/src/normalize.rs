//! Turns raw per-file import diffs into dependency deltas.
//!
//! Import lists of the pre and post image are diffed textually, then
//! path renames are paired off, wildcard shrink/expand groups are absorbed,
//! and what is left is resolved against the snapshot indexes. The net
//! dependency delta is taken at (target module, target class) granularity.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use regex::Regex;

use crate::diag::{Diagnostic, Diagnostics};
use crate::lexical::{
    blank_literals, extract_imports, file_stem, identifier_tokens, is_class_source, strip_comments, ImportKind,
    ImportRecord, Language,
};
use crate::resolver::{ClassIndex, ClassResolution, ResolutionRule};
use crate::vcs::{ChangeKind, CommitDelta, FileDelta};

/// Default line-set similarity above which a delete/add pair is a move.
pub const DEFAULT_MOVE_THRESHOLD: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TargetModule {
    Module(String),
    Ambiguous(BTreeSet<String>),
    External,
}

impl TargetModule {
    pub fn name(&self) -> Option<&str> {
        match self {
            TargetModule::Module(m) => Some(m),
            _ => None,
        }
    }

    /// Repository modules this target may denote.
    pub fn candidates(&self) -> Vec<&str> {
        match self {
            TargetModule::Module(m) => vec![m.as_str()],
            TargetModule::Ambiguous(set) => set.iter().map(String::as_str).collect(),
            TargetModule::External => Vec::new(),
        }
    }
}

pub type DepKey = (TargetModule, String);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dependency {
    pub target_module: TargetModule,
    /// Simple class name, a top-level function name, or `pkg.*` for a
    /// package-granular dependency.
    pub target_class: String,
    pub qualified: String,
    pub package_level: bool,
    /// Only reached through static-member imports.
    pub static_only: bool,
    pub lines: BTreeSet<usize>,
}

impl Dependency {
    pub fn key(&self) -> DepKey {
        (self.target_module.clone(), self.target_class.clone())
    }
}

/// Dependencies keyed by (target module, target class); inserting a key
/// twice merges line sets and static flags.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DepSet {
    map: BTreeMap<DepKey, Dependency>,
}

impl DepSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, dep: Dependency) {
        match self.map.get_mut(&dep.key()) {
            Some(existing) => {
                existing.static_only &= dep.static_only;
                existing.lines.extend(dep.lines);
            }
            None => {
                self.map.insert(dep.key(), dep);
            }
        }
    }

    pub fn contains(&self, key: &DepKey) -> bool {
        self.map.contains_key(key)
    }

    pub fn get(&self, key: &DepKey) -> Option<&Dependency> {
        self.map.get(key)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Dependency> {
        self.map.values()
    }

    pub fn keys(&self) -> impl Iterator<Item = &DepKey> {
        self.map.keys()
    }

    pub fn retain(&mut self, mut keep: impl FnMut(&Dependency) -> bool) {
        self.map.retain(|_, d| keep(d));
    }
}

impl FromIterator<Dependency> for DepSet {
    fn from_iter<I: IntoIterator<Item = Dependency>>(iter: I) -> Self {
        let mut set = DepSet::new();
        for d in iter {
            set.insert(d);
        }
        set
    }
}

fn starts_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

/// Class-looking segment of a dotted path: the first capitalized one, else
/// the last.
fn class_name_of(dotted: &str) -> String {
    let segs: Vec<&str> = dotted.split('.').collect();
    segs.iter()
        .find(|s| starts_upper(s))
        .or(segs.last())
        .map(|s| s.to_string())
        .unwrap_or_default()
}

/// Dependency for a resolved dotted path.
pub fn dependency_from(res: ClassResolution, dotted: &str, line: usize, static_only: bool) -> Dependency {
    let (target_module, target_class, qualified) = match res {
        ClassResolution::Resolved {
            module,
            qualified,
            rule: ResolutionRule::Qualified,
        } => {
            let simple = qualified.rsplit('.').next().unwrap_or(&qualified).to_string();
            (TargetModule::Module(module), simple, qualified)
        }
        ClassResolution::Resolved { module, qualified, .. } => {
            (TargetModule::Module(module), class_name_of(&qualified), qualified)
        }
        ClassResolution::Ambiguous { candidates } => (
            TargetModule::Ambiguous(candidates),
            class_name_of(dotted),
            dotted.to_string(),
        ),
        ClassResolution::External => (TargetModule::External, class_name_of(dotted), dotted.to_string()),
    };
    Dependency {
        target_module,
        target_class,
        qualified,
        package_level: false,
        static_only,
        lines: BTreeSet::from([line]),
    }
}

/// Identifiers of an image's code, outside comments, literals, package
/// and import lines.
pub fn body_names(source: &str) -> BTreeSet<String> {
    let blanked = blank_literals(&strip_comments(source));
    blanked
        .lines()
        .filter(|l| !is_header_line(l))
        .flat_map(|l| identifier_tokens(l).into_iter().map(|t| t.2.to_string()))
        .collect()
}

/// Dependencies contributed by one import statement. A package wildcard
/// stands for the indexed classes of the package that the code names
/// (`names`, see [`body_names`]); when it names none, or the package is
/// not indexed, it yields one package-granular dependency.
pub fn expand_import(rec: &ImportRecord, index: &ClassIndex, names: &BTreeSet<String>) -> Vec<Dependency> {
    let static_only = rec.kind == ImportKind::StaticMember;
    if let Some(package) = rec.wildcard_package() {
        let classes: Vec<&str> = index
            .classes_of_package(&package)
            .into_iter()
            .filter(|q| names.contains(q.rsplit('.').next().unwrap_or(q)))
            .collect();
        if classes.is_empty() {
            let res = index.resolve_package(&package);
            let mut dep = dependency_from(res, &package, rec.line, false);
            dep.target_class = format!("{package}.*");
            dep.qualified = format!("{package}.*");
            dep.package_level = true;
            return vec![dep];
        }
        return classes
            .into_iter()
            .map(|q| dependency_from(index.resolve_qualified(q), q, rec.line, false))
            .collect();
    }
    let class_path = rec.class_path().unwrap_or_default().join(".");
    vec![dependency_from(
        index.resolve_qualified(&class_path),
        &class_path,
        rec.line,
        static_only,
    )]
}

fn qualified_chain_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z_$][\w$]*(?:\.[A-Za-z_$][\w$]*)+").unwrap())
}

fn is_header_line(line: &str) -> bool {
    let t = line.trim_start();
    ["import", "package"]
        .iter()
        .any(|kw| t.strip_prefix(kw).is_some_and(|r| r.starts_with(char::is_whitespace)))
}

/// Fully qualified class references written inline in code (outside
/// package and import lines). Only chains whose prefix is an indexed class
/// count.
pub fn qualified_references(source: &str, index: &ClassIndex) -> Vec<Dependency> {
    let blanked = blank_literals(source);
    let mut out = Vec::new();
    for (i, line) in blanked.lines().enumerate() {
        if is_header_line(line) {
            continue;
        }
        for m in qualified_chain_re().find_iter(line) {
            if line[..m.start()].ends_with('.') || !m.as_str().starts_with(|c: char| c.is_ascii_lowercase()) {
                continue;
            }
            let segs: Vec<&str> = m.as_str().split('.').collect();
            for len in (2..=segs.len()).rev() {
                let candidate = segs[..len].join(".");
                let exact = index.by_qualified_name.contains_key(&candidate)
                    || index.conflicting_qualified.contains_key(&candidate);
                if exact {
                    out.push(dependency_from(
                        index.resolve_qualified(&candidate),
                        &candidate,
                        i + 1,
                        false,
                    ));
                    break;
                }
            }
        }
    }
    out
}

/// Imports of a source image, comment-stripped first.
pub fn imports_of(source: &str, path: &str, diags: &mut Diagnostics) -> Vec<ImportRecord> {
    let language = Language::of_path(path).unwrap_or(Language::Java);
    extract_imports(&strip_comments(source), language, path, diags)
}

/// Every dependency an image expresses: its imports plus inline qualified
/// references.
pub fn reference_set(source: &str, path: &str, index: &ClassIndex) -> DepSet {
    let mut set = DepSet::new();
    let names = body_names(source);
    for rec in imports_of(source, path, &mut Diagnostics::new()) {
        for dep in expand_import(&rec, index, &names) {
            set.insert(dep);
        }
    }
    for dep in qualified_references(source, index) {
        set.insert(dep);
    }
    set
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RenamePairing {
    pub renames: Vec<(ImportRecord, ImportRecord)>,
    pub residual_removed: Vec<ImportRecord>,
    pub residual_added: Vec<ImportRecord>,
}

/// Class file renames of a commit, old path -> new path.
pub type FileRenames = BTreeMap<String, String>;

fn import_file(rec: &ImportRecord, index: &ClassIndex) -> Option<String> {
    let cp = rec.class_path()?.join(".");
    let segs: Vec<&str> = cp.split('.').collect();
    (1..=segs.len())
        .rev()
        .find_map(|len| index.by_qualified_name.get(&segs[..len].join(".")))
        .map(|e| e.path.clone())
}

/// Pairs removed with added imports that name the same thing after a path
/// change: same terminal segment and same resolved module in both
/// snapshots, or the same class file renamed within this commit.
pub fn pair_renames(
    removed: &[ImportRecord],
    added: &[ImportRecord],
    pre_index: &ClassIndex,
    post_index: &ClassIndex,
    file_renames: &FileRenames,
) -> RenamePairing {
    let module_of = |rec: &ImportRecord, index: &ClassIndex| -> Option<String> {
        let res = match rec.wildcard_package() {
            Some(p) => index.resolve_package(&p),
            None => index.resolve_qualified(&rec.class_path().unwrap_or_default().join(".")),
        };
        res.module().map(str::to_string)
    };
    let mut removed_sorted: Vec<&ImportRecord> = removed.iter().collect();
    removed_sorted.sort_by_key(|r| r.key());
    let mut added_sorted: Vec<&ImportRecord> = added.iter().collect();
    added_sorted.sort_by_key(|r| r.key());

    let mut taken = vec![false; added_sorted.len()];
    let mut out = RenamePairing::default();
    for r in removed_sorted {
        let r_module = module_of(r, pre_index);
        let r_file = import_file(r, pre_index);
        let partner = added_sorted.iter().enumerate().position(|(i, a)| {
            if taken[i]
                || a.explicit_static != r.explicit_static
                || (a.kind == ImportKind::Wildcard) != (r.kind == ImportKind::Wildcard)
            {
                return false;
            }
            let same_module = r_module.is_some() && r_module == module_of(a, post_index);
            let same_terminal = a.terminal() == r.terminal();
            let same_file = match (&r_file, import_file(a, post_index)) {
                (Some(old), Some(new)) => file_renames.get(old) == Some(&new),
                _ => false,
            };
            same_module && (same_terminal || same_file)
        });
        match partner {
            Some(i) => {
                taken[i] = true;
                out.renames.push((r.clone(), added_sorted[i].clone()));
            }
            None => out.residual_removed.push(r.clone()),
        }
    }
    out.residual_added = added_sorted
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !taken[*i])
        .map(|(_, a)| a.clone())
        .collect();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum WildcardDirection {
    /// Explicit imports replaced by a wildcard.
    Shrunk,
    /// A wildcard replaced by explicit imports.
    Expanded,
}

impl WildcardDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            WildcardDirection::Shrunk => "shrunk",
            WildcardDirection::Expanded => "expanded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WildcardEvent {
    pub package: String,
    pub direction: WildcardDirection,
    /// Explicit imports on the other side of the wildcard.
    pub explicit: Vec<String>,
}

#[derive(Debug, Clone, Default)]
pub struct WildcardReconciliation {
    pub events: Vec<WildcardEvent>,
    /// Records (wildcards and their explicit partners) absorbed by events.
    pub absorbed: usize,
    pub residual_removed: Vec<ImportRecord>,
    pub residual_added: Vec<ImportRecord>,
    pub net_removed: DepSet,
    pub net_added: DepSet,
}

fn explicit_package(rec: &ImportRecord) -> Option<String> {
    if rec.kind != ImportKind::Plain || rec.segments.len() < 2 {
        return None;
    }
    Some(rec.segments[..rec.segments.len() - 1].join("."))
}

/// Matches wildcards with explicit imports of the same package on the
/// opposite side and computes the class-level net delta of all records.
pub fn reconcile_wildcards(
    removed: &[ImportRecord],
    added: &[ImportRecord],
    pre: (&ClassIndex, &BTreeSet<String>),
    post: (&ClassIndex, &BTreeSet<String>),
) -> WildcardReconciliation {
    let mut out = WildcardReconciliation::default();
    let mut absorbed_removed = vec![false; removed.len()];
    let mut absorbed_added = vec![false; added.len()];

    let group = |wild: &[ImportRecord],
                 wild_flags: &mut [bool],
                 explicit: &[ImportRecord],
                 explicit_flags: &mut [bool],
                 direction: WildcardDirection,
                 events: &mut Vec<WildcardEvent>| {
        for (wi, w) in wild.iter().enumerate() {
            let Some(package) = w.wildcard_package() else { continue };
            let partners: Vec<usize> = explicit
                .iter()
                .enumerate()
                .filter(|(ei, e)| !explicit_flags[*ei] && explicit_package(e).as_deref() == Some(package.as_str()))
                .map(|(ei, _)| ei)
                .collect();
            if partners.is_empty() {
                continue;
            }
            wild_flags[wi] = true;
            for &ei in &partners {
                explicit_flags[ei] = true;
            }
            let mut names: Vec<String> = partners.iter().map(|&ei| explicit[ei].path()).collect();
            names.sort();
            events.push(WildcardEvent {
                package,
                direction,
                explicit: names,
            });
        }
    };
    group(
        added,
        &mut absorbed_added,
        removed,
        &mut absorbed_removed,
        WildcardDirection::Shrunk,
        &mut out.events,
    );
    group(
        removed,
        &mut absorbed_removed,
        added,
        &mut absorbed_added,
        WildcardDirection::Expanded,
        &mut out.events,
    );
    out.events
        .sort_by(|a, b| (&a.package, a.direction).cmp(&(&b.package, b.direction)));

    out.absorbed = absorbed_removed.iter().chain(&absorbed_added).filter(|f| **f).count();
    out.residual_removed = removed
        .iter()
        .zip(&absorbed_removed)
        .filter(|(_, f)| !**f)
        .map(|(r, _)| r.clone())
        .collect();
    out.residual_added = added
        .iter()
        .zip(&absorbed_added)
        .filter(|(_, f)| !**f)
        .map(|(r, _)| r.clone())
        .collect();

    let removed_deps: DepSet = removed.iter().flat_map(|r| expand_import(r, pre.0, pre.1)).collect();
    let added_deps: DepSet = added.iter().flat_map(|r| expand_import(r, post.0, post.1)).collect();
    out.net_removed = removed_deps.clone();
    out.net_removed.retain(|d| !added_deps.contains(&d.key()));
    out.net_added = added_deps;
    out.net_added.retain(|d| !removed_deps.contains(&d.key()));
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FileMove {
    pub class: String,
    pub old_class: String,
    pub old_path: String,
    pub new_path: String,
    pub old_module: Option<String>,
    pub new_module: Option<String>,
    pub similarity: f64,
}

impl FileMove {
    pub fn is_cross_module(&self) -> bool {
        self.old_module.is_some() && self.new_module.is_some() && self.old_module != self.new_module
    }
}

fn content_lines(source: &str) -> BTreeSet<String> {
    strip_comments(source)
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !is_header_line(l))
        .map(str::to_string)
        .collect()
}

/// Jaccard similarity of the sets of trimmed, non-empty lines of two
/// sources, ignoring comments and package/import lines.
pub fn line_set_similarity(a: &str, b: &str) -> f64 {
    let (la, lb) = (content_lines(a), content_lines(b));
    let union = la.union(&lb).count();
    if union == 0 {
        return 1.0;
    }
    la.intersection(&lb).count() as f64 / union as f64
}

/// Source with every whole-word occurrence of `from` replaced by `to`.
fn rename_identifier(source: &str, from: &str, to: &str) -> String {
    let re = Regex::new(&format!(r"\b{}\b", regex::escape(from))).expect("escaped identifier");
    re.replace_all(source, regex::NoExpand(to)).into_owned()
}

/// Exact renames, then deleted/added pairs whose similarity reaches
/// `threshold`: first among files of the same class name, then, for class
/// renames, among the rest with the old name substituted by the new one.
pub fn detect_file_moves(
    commit: &CommitDelta,
    pre_index: &ClassIndex,
    post_index: &ClassIndex,
    threshold: f64,
) -> Vec<FileMove> {
    let mut moves = Vec::new();
    let mut push = |old: &str, new: &str, similarity: f64| {
        moves.push(FileMove {
            class: file_stem(new).to_string(),
            old_class: file_stem(old).to_string(),
            old_path: old.to_string(),
            new_path: new.to_string(),
            old_module: pre_index.module_of_file(old).map(str::to_string),
            new_module: post_index.module_of_file(new).map(str::to_string),
            similarity,
        });
    };
    for f in commit.files.iter().filter(|f| f.change_kind == ChangeKind::Renamed) {
        if is_class_source(f.pre_path()) && is_class_source(&f.path) {
            push(f.pre_path(), &f.path, 1.0);
        }
    }

    let of_kind = |kind: ChangeKind| -> Vec<&FileDelta> {
        commit
            .files
            .iter()
            .filter(|f| f.change_kind == kind && is_class_source(&f.path))
            .collect()
    };
    let deleted = of_kind(ChangeKind::Deleted);
    let added = of_kind(ChangeKind::Added);
    let mut deleted_taken = vec![false; deleted.len()];
    let mut added_taken = vec![false; added.len()];
    for same_stem in [true, false] {
        for (di, d) in deleted.iter().enumerate() {
            if deleted_taken[di] {
                continue;
            }
            let stem = file_stem(&d.path);
            let pre = d.pre_image.as_deref().unwrap_or("");
            let best = added
                .iter()
                .enumerate()
                .filter(|(i, a)| !added_taken[*i] && (file_stem(&a.path) == stem) == same_stem)
                .map(|(i, a)| {
                    let post = a.post_image.as_deref().unwrap_or("");
                    let similarity = if same_stem {
                        line_set_similarity(pre, post)
                    } else {
                        line_set_similarity(&rename_identifier(pre, stem, file_stem(&a.path)), post)
                    };
                    (i, similarity)
                })
                .filter(|(_, s)| *s >= threshold)
                .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)));
            if let Some((i, similarity)) = best {
                added_taken[i] = true;
                deleted_taken[di] = true;
                push(&d.path, &added[i].path, similarity);
            }
        }
    }
    moves.sort_by(|a, b| a.new_path.cmp(&b.new_path));
    moves
}

/// Renames of class files within one module, as (module, old class) ->
/// (module, new class). Dependencies on such a class are carried across.
pub fn class_renames(moves: &[FileMove]) -> BTreeMap<DepKey, DepKey> {
    moves
        .iter()
        .filter(|m| m.old_module.is_some() && m.old_module == m.new_module && m.class != m.old_class)
        .map(|m| {
            let module = TargetModule::Module(m.new_module.clone().unwrap_or_default());
            ((module.clone(), m.old_class.clone()), (module, m.class.clone()))
        })
        .collect()
}

#[derive(Debug, Clone, Default)]
pub struct NormalizedImportDelta {
    pub file: String,
    pub pre_path: Option<String>,
    pub added_deps: DepSet,
    pub removed_deps: DepSet,
    pub renames: Vec<(String, String)>,
    pub wildcard_events: Vec<WildcardEvent>,
    pub unresolved: Vec<String>,
    pub raw_removed: usize,
    pub raw_added: usize,
    pub wildcard_absorbed: usize,
    pub residuals: usize,
}

impl NormalizedImportDelta {
    pub fn is_empty(&self) -> bool {
        self.added_deps.is_empty() && self.removed_deps.is_empty()
    }

    /// Every raw import change is a rename half, absorbed by a wildcard
    /// event, or a residual.
    pub fn conserves(&self) -> bool {
        self.raw_removed + self.raw_added == 2 * self.renames.len() + self.wildcard_absorbed + self.residuals
    }
}

/// Context shared by the files of one commit.
#[derive(Debug, Clone, Default)]
pub struct CommitRenames {
    pub files: FileRenames,
    pub classes: BTreeMap<DepKey, DepKey>,
}

impl CommitRenames {
    pub fn from_moves(moves: &[FileMove]) -> Self {
        CommitRenames {
            files: moves.iter().map(|m| (m.old_path.clone(), m.new_path.clone())).collect(),
            classes: class_renames(moves),
        }
    }
}

fn dedup_by_key(records: Vec<ImportRecord>) -> BTreeMap<(bool, String), ImportRecord> {
    let mut map = BTreeMap::new();
    for r in records {
        map.entry(r.key()).or_insert(r);
    }
    map
}

/// Full normalization of one file's change.
///
/// Besides the import-list difference this picks up two things a pure text
/// diff misses: inline qualified references, and unchanged imports whose
/// target changed module in this commit. Dependencies still expressed by
/// the other image are dropped at the end.
pub fn normalize_import_delta(
    file_delta: &FileDelta,
    pre_index: &ClassIndex,
    post_index: &ClassIndex,
    renames: &CommitRenames,
    diags: &mut Diagnostics,
) -> NormalizedImportDelta {
    let pre_path = file_delta.pre_path().to_string();
    let pre_src = file_delta.pre_image.as_deref().unwrap_or("");
    let post_src = file_delta.post_image.as_deref().unwrap_or("");
    let pre_imports = dedup_by_key(imports_of(pre_src, &pre_path, diags));
    let post_imports = dedup_by_key(imports_of(post_src, &file_delta.path, diags));

    let removed: Vec<ImportRecord> = pre_imports
        .iter()
        .filter(|(k, _)| !post_imports.contains_key(*k))
        .map(|(_, r)| r.clone())
        .collect();
    let added: Vec<ImportRecord> = post_imports
        .iter()
        .filter(|(k, _)| !pre_imports.contains_key(*k))
        .map(|(_, r)| r.clone())
        .collect();

    let pairing = pair_renames(&removed, &added, pre_index, post_index, &renames.files);
    let pre_names = body_names(pre_src);
    let post_names = body_names(post_src);
    let wild = reconcile_wildcards(
        &pairing.residual_removed,
        &pairing.residual_added,
        (pre_index, &pre_names),
        (post_index, &post_names),
    );

    let mut removed_candidates = wild.net_removed.clone();
    let mut added_candidates = wild.net_added.clone();
    for (key, rec) in pre_imports.iter().filter(|(k, _)| post_imports.contains_key(*k)) {
        let before: DepSet = expand_import(rec, pre_index, &pre_names).into_iter().collect();
        let after: DepSet = expand_import(&post_imports[key], post_index, &post_names)
            .into_iter()
            .collect();
        if before != after {
            before.iter().for_each(|d| removed_candidates.insert(d.clone()));
            after.iter().for_each(|d| added_candidates.insert(d.clone()));
        }
    }
    qualified_references(pre_src, pre_index)
        .into_iter()
        .for_each(|d| removed_candidates.insert(d));
    qualified_references(post_src, post_index)
        .into_iter()
        .for_each(|d| added_candidates.insert(d));

    let canon = |key: DepKey| renames.classes.get(&key).cloned().unwrap_or(key);
    let pre_refs: BTreeSet<DepKey> = if file_delta.pre_image.is_some() {
        reference_set(pre_src, &pre_path, pre_index)
            .keys()
            .cloned()
            .map(canon)
            .collect()
    } else {
        BTreeSet::new()
    };
    let post_refs = if file_delta.post_image.is_some() {
        reference_set(post_src, &file_delta.path, post_index)
    } else {
        DepSet::new()
    };
    removed_candidates.retain(|d| !post_refs.contains(&canon(d.key())));
    added_candidates.retain(|d| !pre_refs.contains(&d.key()));

    let mut unresolved = Vec::new();
    for rec in wild.residual_removed.iter().chain(&wild.residual_added) {
        let deps = if wild.residual_removed.contains(rec) {
            expand_import(rec, pre_index, &pre_names)
        } else {
            expand_import(rec, post_index, &post_names)
        };
        if deps
            .iter()
            .any(|d| matches!(d.target_module, TargetModule::Ambiguous(_)))
        {
            diags.push(
                Diagnostic::new(
                    "ambiguous-import",
                    format!("'{}' resolves to several modules", rec.path()),
                )
                .in_file(rec.file.clone())
                .at_line(rec.line),
            );
            unresolved.push(rec.path());
        }
    }

    NormalizedImportDelta {
        file: file_delta.path.clone(),
        pre_path: file_delta.pre_image.as_ref().map(|_| pre_path.clone()),
        added_deps: added_candidates,
        removed_deps: removed_candidates,
        renames: pairing.renames.iter().map(|(r, a)| (r.path(), a.path())).collect(),
        wildcard_events: wild.events,
        unresolved,
        raw_removed: removed.len(),
        raw_added: added.len(),
        wildcard_absorbed: wild.absorbed,
        residuals: wild.residual_removed.len() + wild.residual_added.len(),
    }
}
