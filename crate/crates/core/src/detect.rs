//! The M2M verdict: architectural deltas, cross-module import deltas and
//! module-descriptor operations.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::diag::{Diagnostic, Diagnostics};
use crate::lexical::{
    is_class_source, is_descriptor_path, parse_module_descriptor_reporting, strip_comments, Directive, DirectiveOp,
    ModuleDescriptor,
};
use crate::normalize::{FileMove, NormalizedImportDelta, TargetModule};
use crate::resolver::ClassIndex;
use crate::vcs::{ChangeKind, CommitDelta};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Criterion {
    #[serde(rename = "A2A_DELTA")]
    A2aDelta,
    #[serde(rename = "IDSD")]
    Idsd,
    #[serde(rename = "MO")]
    Mo,
}

impl Criterion {
    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::A2aDelta => "A2A_DELTA",
            Criterion::Idsd => "IDSD",
            Criterion::Mo => "MO",
        }
    }

    pub fn parse(s: &str) -> Option<Criterion> {
        match s {
            "A2A_DELTA" => Some(Criterion::A2aDelta),
            "IDSD" => Some(Criterion::Idsd),
            "MO" => Some(Criterion::Mo),
            _ => None,
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Whether IDSD evidence with an ambiguous target counts toward M2M.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AmbiguityMode {
    #[default]
    Lenient,
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChangeAction {
    Added,
    Deleted,
    Modified,
    Moved,
}

impl ChangeAction {
    pub fn as_str(self) -> &'static str {
        match self {
            ChangeAction::Added => "added",
            ChangeAction::Deleted => "deleted",
            ChangeAction::Modified => "modified",
            ChangeAction::Moved => "moved",
        }
    }
}

/// One entry of a descriptor diff. `op` is a directive op name, or `open`
/// for the open flag, or `module` for a module rename.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DirectiveChange {
    pub module: String,
    pub op: String,
    pub target: String,
    pub action: ChangeAction,
    pub before: Option<Directive>,
    pub after: Option<Directive>,
}

impl DirectiveChange {
    /// Targets a connected/disconnected slice points at: the `to` modules
    /// of a qualified export or open, otherwise the directive target.
    pub fn qualifier(&self) -> Option<&[String]> {
        let d = self.after.as_ref().or(self.before.as_ref())?;
        if matches!(d.op, DirectiveOp::Exports | DirectiveOp::Opens) {
            d.qualifier.as_deref()
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum EvidenceDetail {
    Module {
        module: String,
        action: ChangeAction,
    },
    Class {
        class: String,
        action: ChangeAction,
        from_module: Option<String>,
        to_module: Option<String>,
    },
    Dependency {
        source_module: String,
        target_module: TargetModule,
        class: String,
        action: ChangeAction,
    },
    Directive(DirectiveChange),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EvidenceRecord {
    pub kind: Criterion,
    pub description: String,
    pub file: String,
    pub detail: EvidenceDetail,
    /// Rests on an ambiguous resolution.
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct M2MVerdict {
    pub commit_id: String,
    pub is_m2m: bool,
    pub criteria: BTreeSet<Criterion>,
    pub evidence: Vec<EvidenceRecord>,
}

/// Parsed descriptor images of one changed `module-info.java`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescriptorDiff {
    pub path: String,
    pub pre: Option<ModuleDescriptor>,
    pub post: Option<ModuleDescriptor>,
}

/// Parses both sides of every changed descriptor. A side that does not
/// parse is treated as absent, with a diagnostic.
pub fn descriptor_diffs(commit: &CommitDelta, diags: &mut Diagnostics) -> Vec<DescriptorDiff> {
    let mut parse = |text: Option<&str>, path: &str| {
        let text = text?;
        match parse_module_descriptor_reporting(&strip_comments(text), diags) {
            Ok(d) => Some(d),
            Err(e) => {
                diags.push(Diagnostic::new("unparseable-descriptor", e.to_string()).in_file(path));
                None
            }
        }
    };
    let mut out = Vec::new();
    for f in &commit.files {
        let pre_is = is_descriptor_path(f.pre_path()) && f.pre_image.is_some();
        let post_is = is_descriptor_path(&f.path) && f.post_image.is_some();
        if !pre_is && !post_is {
            continue;
        }
        let pre = if pre_is {
            parse(f.pre_image.as_deref(), f.pre_path())
        } else {
            None
        };
        let post = if post_is {
            parse(f.post_image.as_deref(), &f.path)
        } else {
            None
        };
        out.push(DescriptorDiff {
            path: f.path.clone(),
            pre,
            post,
        });
    }
    out
}

/// Directive-set difference of two descriptor versions, keyed by (op
/// family, target). A change of qualifier or of `transitive` is one
/// modification.
pub fn directive_changes(pre: Option<&ModuleDescriptor>, post: Option<&ModuleDescriptor>) -> Vec<DirectiveChange> {
    let module = post.or(pre).map(|d| d.module_name.clone()).unwrap_or_default();
    let keyed = |d: Option<&ModuleDescriptor>| -> BTreeMap<(DirectiveOp, String), Directive> {
        d.map(|d| {
            d.directives
                .iter()
                .map(|dir| ((dir.op.family(), dir.target.clone()), dir.clone()))
                .collect()
        })
        .unwrap_or_default()
    };
    let (before, after) = (keyed(pre), keyed(post));
    let mut out = Vec::new();
    for (key, b) in &before {
        match after.get(key) {
            None => out.push(DirectiveChange {
                module: module.clone(),
                op: b.op.as_str().into(),
                target: b.target.clone(),
                action: ChangeAction::Deleted,
                before: Some(b.clone()),
                after: None,
            }),
            Some(a) if a != b => out.push(DirectiveChange {
                module: module.clone(),
                op: a.op.as_str().into(),
                target: a.target.clone(),
                action: ChangeAction::Modified,
                before: Some(b.clone()),
                after: Some(a.clone()),
            }),
            Some(_) => {}
        }
    }
    for (key, a) in &after {
        if !before.contains_key(key) {
            out.push(DirectiveChange {
                module: module.clone(),
                op: a.op.as_str().into(),
                target: a.target.clone(),
                action: ChangeAction::Added,
                before: None,
                after: Some(a.clone()),
            });
        }
    }
    if let (Some(p), Some(q)) = (pre, post) {
        if p.is_open != q.is_open {
            out.push(DirectiveChange {
                module: module.clone(),
                op: "open".into(),
                target: module.clone(),
                action: if q.is_open {
                    ChangeAction::Added
                } else {
                    ChangeAction::Deleted
                },
                before: None,
                after: None,
            });
        }
        if p.module_name != q.module_name {
            out.push(DirectiveChange {
                module: module.clone(),
                op: "module".into(),
                target: q.module_name.clone(),
                action: ChangeAction::Modified,
                before: None,
                after: None,
            });
        }
    }
    out.sort();
    out
}

/// Module and class additions, deletions and cross-module moves.
pub fn detect_a2a_delta(
    commit: &CommitDelta,
    pre_index: &ClassIndex,
    post_index: &ClassIndex,
    moves: &[FileMove],
) -> Vec<EvidenceRecord> {
    let mut out = Vec::new();
    let pre_mods: BTreeMap<&str, _> = pre_index.layouts.iter().map(|l| (l.module_name.as_str(), l)).collect();
    let post_mods: BTreeMap<&str, _> = post_index.layouts.iter().map(|l| (l.module_name.as_str(), l)).collect();
    let renamed_in_place = |path: &str, other: &BTreeMap<&str, &crate::resolver::ModuleLayout>| {
        other.values().any(|l| l.descriptor_path == path)
    };
    let module_record = |module: &str, file: &str, action: ChangeAction| EvidenceRecord {
        kind: Criterion::A2aDelta,
        description: format!("module {module} {}", action.as_str()),
        file: file.to_string(),
        detail: EvidenceDetail::Module {
            module: module.to_string(),
            action,
        },
        ambiguous: false,
    };
    for (name, layout) in &post_mods {
        match pre_mods.get(name) {
            None if !renamed_in_place(&layout.descriptor_path, &pre_mods) => {
                out.push(module_record(name, &layout.descriptor_path, ChangeAction::Added))
            }
            Some(old) if old.root_dir != layout.root_dir => {
                out.push(module_record(name, &layout.descriptor_path, ChangeAction::Moved))
            }
            _ => {}
        }
    }
    for (name, layout) in &pre_mods {
        if !post_mods.contains_key(name) && !renamed_in_place(&layout.descriptor_path, &post_mods) {
            out.push(module_record(name, &layout.descriptor_path, ChangeAction::Deleted));
        }
    }

    let class_record = |class: &str, file: &str, action: ChangeAction, from: Option<&str>, to: Option<&str>| {
        let description = match action {
            ChangeAction::Moved => format!("class {class} moved {} -> {}", from.unwrap_or("?"), to.unwrap_or("?")),
            _ => format!("class {class} {} in {}", action.as_str(), to.or(from).unwrap_or("?")),
        };
        EvidenceRecord {
            kind: Criterion::A2aDelta,
            description,
            file: file.to_string(),
            detail: EvidenceDetail::Class {
                class: class.to_string(),
                action,
                from_module: from.map(str::to_string),
                to_module: to.map(str::to_string),
            },
            ambiguous: false,
        }
    };
    let moved_old: BTreeSet<&str> = moves.iter().map(|m| m.old_path.as_str()).collect();
    let moved_new: BTreeSet<&str> = moves.iter().map(|m| m.new_path.as_str()).collect();
    for f in commit.files.iter().filter(|f| is_class_source(&f.path)) {
        let class = crate::lexical::file_stem(&f.path);
        match f.change_kind {
            ChangeKind::Added if !moved_new.contains(f.path.as_str()) => {
                if let Some(m) = post_index.module_of_file(&f.path) {
                    out.push(class_record(class, &f.path, ChangeAction::Added, None, Some(m)));
                }
            }
            ChangeKind::Deleted if !moved_old.contains(f.path.as_str()) => {
                if let Some(m) = pre_index.module_of_file(&f.path) {
                    out.push(class_record(class, &f.path, ChangeAction::Deleted, Some(m), None));
                }
            }
            _ => {}
        }
    }
    for m in moves {
        let (from, to) = (m.old_module.as_deref(), m.new_module.as_deref());
        match (from, to) {
            (Some(_), Some(_)) if m.is_cross_module() => {
                out.push(class_record(&m.class, &m.new_path, ChangeAction::Moved, from, to))
            }
            (None, Some(_)) => out.push(class_record(&m.class, &m.new_path, ChangeAction::Added, None, to)),
            (Some(_), None) => out.push(class_record(
                &m.old_class,
                &m.old_path,
                ChangeAction::Deleted,
                from,
                None,
            )),
            _ => {}
        }
    }
    out.sort();
    out
}

/// Added and removed dependencies whose target lies in another repository
/// module. External targets never count.
pub fn detect_idsd(
    deltas: &[NormalizedImportDelta],
    post_index: &ClassIndex,
    pre_index: &ClassIndex,
) -> Vec<EvidenceRecord> {
    let mut out = Vec::new();
    for d in deltas {
        let sides = [
            (
                post_index.module_of_file(&d.file),
                &d.added_deps,
                ChangeAction::Added,
                &d.file,
            ),
            (
                d.pre_path.as_deref().and_then(|p| pre_index.module_of_file(p)),
                &d.removed_deps,
                ChangeAction::Deleted,
                d.pre_path.as_ref().unwrap_or(&d.file),
            ),
        ];
        for (source, deps, action, file) in sides {
            let Some(source) = source else { continue };
            for dep in deps.iter() {
                let foreign: Vec<&str> = dep
                    .target_module
                    .candidates()
                    .into_iter()
                    .filter(|m| *m != source)
                    .collect();
                if foreign.is_empty() {
                    continue;
                }
                let ambiguous = matches!(dep.target_module, TargetModule::Ambiguous(_));
                let verb = if action == ChangeAction::Added {
                    "gains"
                } else {
                    "drops"
                };
                out.push(EvidenceRecord {
                    kind: Criterion::Idsd,
                    description: format!(
                        "{source} {verb} dependency on {}:{}",
                        foreign.join("|"),
                        dep.target_class
                    ),
                    file: file.clone(),
                    detail: EvidenceDetail::Dependency {
                        source_module: source.to_string(),
                        target_module: dep.target_module.clone(),
                        class: dep.target_class.clone(),
                        action,
                    },
                    ambiguous,
                });
            }
        }
    }
    out.sort();
    out
}

/// One record per directive added, removed or modified.
pub fn detect_mo(diffs: &[DescriptorDiff]) -> Vec<EvidenceRecord> {
    let mut out = Vec::new();
    for d in diffs {
        for change in directive_changes(d.pre.as_ref(), d.post.as_ref()) {
            out.push(EvidenceRecord {
                kind: Criterion::Mo,
                description: format!("{} {}({})", change.action.as_str(), change.op, change.target),
                file: d.path.clone(),
                detail: EvidenceDetail::Directive(change),
                ambiguous: false,
            });
        }
    }
    out.sort();
    out
}

/// M2M iff some evidence counts; in strict mode ambiguous evidence does not.
pub fn classify_m2m(commit_id: &str, evidence: Vec<EvidenceRecord>, mode: AmbiguityMode) -> M2MVerdict {
    let criteria: BTreeSet<Criterion> = evidence
        .iter()
        .filter(|e| mode == AmbiguityMode::Lenient || !e.ambiguous)
        .map(|e| e.kind)
        .collect();
    M2MVerdict {
        commit_id: commit_id.to_string(),
        is_m2m: !criteria.is_empty(),
        criteria,
        evidence,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexical::parse_module_descriptor;
    use crate::normalize::{DepSet, Dependency};
    use crate::resolver::{build_class_index, FileFacts, ModuleLayout};
    use crate::vcs::FileDelta;

    fn desc(src: &str) -> ModuleDescriptor {
        parse_module_descriptor(src).unwrap()
    }

    fn summary(changes: &[DirectiveChange]) -> Vec<(String, String, &'static str)> {
        changes
            .iter()
            .map(|c| (c.op.clone(), c.target.clone(), c.action.as_str()))
            .collect()
    }

    #[test]
    fn requires_added() {
        let c = directive_changes(Some(&desc("module m { }")), Some(&desc("module m { requires c.d; }")));
        assert_eq!(summary(&c), vec![("requires".into(), "c.d".into(), "added")]);
    }

    #[test]
    fn reformat_is_silent() {
        let a = desc("module m { requires c.d; exports p; }");
        let b = desc("module m {\n  exports   p ;\n\n  requires c.d;\n}");
        assert!(directive_changes(Some(&a), Some(&b)).is_empty());
    }

    #[test]
    fn qualified_open_is_one_modification() {
        let c = directive_changes(
            Some(&desc("module m { opens p; }")),
            Some(&desc("module m { opens p to k; }")),
        );
        assert_eq!(summary(&c), vec![("opens".into(), "p".into(), "modified")]);
        let c = directive_changes(
            Some(&desc("module m { requires k; }")),
            Some(&desc("module m { requires transitive k; }")),
        );
        assert_eq!(
            summary(&c),
            vec![("requires_transitive".into(), "k".into(), "modified")]
        );
    }

    #[test]
    fn open_flag_and_rename() {
        let c = directive_changes(Some(&desc("module m { }")), Some(&desc("open module m2 { }")));
        assert_eq!(
            summary(&c),
            vec![
                ("module".into(), "m2".into(), "modified"),
                ("open".into(), "m2".into(), "added")
            ]
        );
    }

    fn commit(files: Vec<FileDelta>) -> CommitDelta {
        CommitDelta {
            commit_id: "c1".into(),
            parent_id: Some("c0".into()),
            timestamp: chrono::Utc::now(),
            message: String::new(),
            files,
        }
    }

    #[test]
    fn descriptor_only_commit_is_mo() {
        let c = commit(vec![FileDelta {
            path: "m/src/module-info.java".into(),
            change_kind: ChangeKind::Modified,
            old_path: None,
            hunks: Vec::new(),
            pre_image: Some("module m { }".into()),
            post_image: Some("module m { requires k; }".into()),
        }]);
        let diffs = descriptor_diffs(&c, &mut Diagnostics::new());
        let v = classify_m2m("c1", detect_mo(&diffs), AmbiguityMode::Lenient);
        assert!(v.is_m2m);
        assert_eq!(v.criteria, BTreeSet::from([Criterion::Mo]));
    }

    #[test]
    fn broken_descriptor_side_is_empty() {
        let c = commit(vec![FileDelta {
            path: "m/src/module-info.java".into(),
            change_kind: ChangeKind::Modified,
            old_path: None,
            hunks: Vec::new(),
            pre_image: Some("garbage".into()),
            post_image: Some("module m { requires k; }".into()),
        }]);
        let mut diags = Diagnostics::new();
        let diffs = descriptor_diffs(&c, &mut diags);
        assert!(diags.has_code("unparseable-descriptor"));
        assert_eq!(detect_mo(&diffs).len(), 1);
    }

    fn idx(files: &[(&str, &str, &str)]) -> ClassIndex {
        let mut layouts: Vec<ModuleLayout> = Vec::new();
        let mut facts = BTreeMap::new();
        let mut listing = Vec::new();
        for (module, path, src) in files {
            let root = path.split('/').next().unwrap();
            if !layouts.iter().any(|l| l.module_name == *module) {
                layouts.push(ModuleLayout {
                    module_name: module.to_string(),
                    root_dir: root.into(),
                    source_roots: vec![format!("{root}/src")],
                    descriptor_path: format!("{root}/src/module-info.java"),
                    pattern: Some("src".into()),
                });
            }
            facts.insert(path.to_string(), FileFacts::from_source(path, src));
            listing.push(path.to_string());
        }
        listing.sort();
        build_class_index(&layouts, &listing, &facts)
    }

    fn dep(module: TargetModule, class: &str) -> Dependency {
        Dependency {
            target_module: module,
            target_class: class.into(),
            qualified: class.into(),
            package_level: false,
            static_only: false,
            lines: BTreeSet::from([1]),
        }
    }

    #[test]
    fn idsd_excludes_same_module_and_external() {
        let index = idx(&[
            ("asbc", "asbc/src/b/Ebcb.java", "package b;"),
            ("asbc", "asbc/src/b/Base.java", "package b;"),
            ("asc", "asc/src/c/Stc.java", "package c;"),
        ]);
        let mut delta = NormalizedImportDelta {
            file: "asbc/src/b/Ebcb.java".into(),
            pre_path: Some("asbc/src/b/Ebcb.java".into()),
            ..Default::default()
        };
        delta.added_deps = DepSet::from_iter([
            dep(TargetModule::Module("asc".into()), "Stc"),
            dep(TargetModule::Module("asbc".into()), "Base"),
            dep(TargetModule::External, "List"),
        ]);
        let ev = detect_idsd(&[delta], &index, &index);
        assert_eq!(ev.len(), 1);
        assert!(matches!(&ev[0].detail, EvidenceDetail::Dependency { class, .. } if class == "Stc"));
    }

    #[test]
    fn strict_mode_ignores_ambiguous() {
        let index = idx(&[("m1", "m1/src/a/F.java", "package a;")]);
        let mut delta = NormalizedImportDelta {
            file: "m1/src/a/F.java".into(),
            ..Default::default()
        };
        let both = TargetModule::Ambiguous(BTreeSet::from(["m2".to_string(), "m3".to_string()]));
        delta.added_deps = DepSet::from_iter([dep(both, "Util")]);
        let ev = detect_idsd(&[delta], &index, &index);
        assert!(ev[0].ambiguous);
        assert!(classify_m2m("c", ev.clone(), AmbiguityMode::Lenient).is_m2m);
        assert!(!classify_m2m("c", ev, AmbiguityMode::Strict).is_m2m);
    }

    #[test]
    fn a2a_class_added_and_same_module_move() {
        let pre = idx(&[("m1", "m1/src/a/Old.java", "package a;")]);
        let post = idx(&[
            ("m1", "m1/src/b/Old.java", "package b;"),
            ("m1", "m1/src/a/New.java", "package a;"),
        ]);
        let c = commit(vec![
            FileDelta {
                path: "m1/src/a/New.java".into(),
                change_kind: ChangeKind::Added,
                old_path: None,
                hunks: Vec::new(),
                pre_image: None,
                post_image: Some("package a;".into()),
            },
            FileDelta {
                path: "m1/src/b/Old.java".into(),
                change_kind: ChangeKind::Renamed,
                old_path: Some("m1/src/a/Old.java".into()),
                hunks: Vec::new(),
                pre_image: Some("package a;".into()),
                post_image: Some("package b;".into()),
            },
        ]);
        let moves = crate::normalize::detect_file_moves(&c, &pre, &post, 0.8);
        let ev = detect_a2a_delta(&c, &pre, &post, &moves);
        assert_eq!(ev.len(), 1);
        assert!(
            matches!(&ev[0].detail, EvidenceDetail::Class { class, action: ChangeAction::Added, .. } if class == "New")
        );
        assert!(detect_a2a_delta(&commit(vec![]), &pre, &pre, &[]).is_empty());
    }
}
