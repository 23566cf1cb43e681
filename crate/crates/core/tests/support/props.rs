//! Randomized invariant suites. Each runs a fixed number of cases from a
//! recorded seed, so a failure reproduces exactly.

use std::collections::{BTreeMap, BTreeSet};

use archslicer::detect::{Criterion, M2MVerdict};
use archslicer::normalize::{detect_file_moves, normalize_import_delta, CommitRenames, NormalizedImportDelta};
use archslicer::pipeline::SnapshotModel;
use archslicer::report::{emit_yaml, parse_yaml, ToolConfig};
use archslicer::resolver::{resolve_module_of_path, ModuleLayout};
use archslicer::slice::{MemberContext, Relation, SliceDocument, SliceRecord};
use archslicer::vcs::{ChangeKind, CommitDelta, FileDelta, Snapshot};
use archslicer::Diagnostics;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use sha2::{Digest, Sha256};

pub const CASES: u32 = 1000;

pub const SEED_WILDCARD: [u8; 32] = *b"wildcard-expand-shrink-equiv-001";
pub const SEED_PACKAGE_RENAME: [u8; 32] = *b"package-path-rename-neutral-0002";
pub const SEED_LONGEST_ROOT: [u8; 32] = *b"longest-root-module-resolve-0003";
pub const SEED_EMISSION: [u8; 32] = *b"yaml-emission-determinism---0004";
pub const SEED_CONSERVATION: [u8; 32] = *b"diff-normalizer-conservation0005";

/// Outcome of one suite: cases run, or the minimal failing case.
pub type SuiteResult = Result<u32, String>;

fn runner(seed: &[u8; 32]) -> TestRunner {
    let config = Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, seed))
}

fn run<S: Strategy>(seed: &[u8; 32], strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> SuiteResult
where
    S::Value: std::fmt::Debug,
{
    runner(seed)
        .run(&strategy, test)
        .map(|_| CASES)
        .map_err(|e| e.to_string())
}

fn model(files: &[(String, String)]) -> SnapshotModel {
    let mut listing: Vec<String> = files.iter().map(|f| f.0.clone()).collect();
    listing.sort();
    let snapshot = Snapshot {
        commit_id: None,
        listing,
        sources: files.iter().cloned().collect(),
    };
    SnapshotModel::build(snapshot, &ToolConfig::default())
}

fn delta(path: &str, kind: ChangeKind, old: Option<&str>, pre: Option<String>, post: Option<String>) -> FileDelta {
    FileDelta {
        path: path.to_string(),
        change_kind: kind,
        old_path: old.map(str::to_string),
        hunks: Vec::new(),
        pre_image: pre,
        post_image: post,
    }
}

fn normalize(
    fd: &FileDelta,
    pre: &SnapshotModel,
    post: &SnapshotModel,
    renames: &CommitRenames,
) -> NormalizedImportDelta {
    normalize_import_delta(fd, &pre.index, &post.index, renames, &mut Diagnostics::new())
}

const LIB: &str = "lib/src/main/java";
const APP: &str = "app/src/main/java";

fn class_file(package: &str, name: &str, kotlin: bool) -> String {
    if kotlin {
        format!("package {package}\n\nclass {name} {{\n    fun id(): String = \"{name}\"\n}}\n")
    } else {
        format!("package {package};\n\npublic class {name} {{\n    public String id() {{\n        return \"{name}\";\n    }}\n}}\n")
    }
}

/// Importer text: the given import lines and a body naming `used`.
fn importer(kotlin: bool, imports: &[String], used: &[String]) -> String {
    let semi = if kotlin { "" } else { ";" };
    let mut s = format!("package org.app{semi}\n\n");
    for i in imports {
        s.push_str(&format!("import {i}{semi}\n"));
    }
    s.push_str("\npublic class Client {\n");
    for (n, u) in used.iter().enumerate() {
        if kotlin {
            s.push_str(&format!("    val f{n}: {u}? = null\n"));
        } else {
            s.push_str(&format!("    private {u} f{n};\n"));
        }
    }
    s.push_str("}\n");
    s
}

#[derive(Debug, Clone)]
pub struct WildcardCase {
    package: Vec<String>,
    classes: usize,
    used: Vec<bool>,
    order: Vec<usize>,
    shrink: bool,
    kotlin: bool,
    unchanged_extra: bool,
}

fn package_segments() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::sample::select(vec!["alpha", "beta", "gamma", "io", "text", "util"]),
        1..4,
    )
    .prop_map(|v| v.into_iter().map(str::to_string).collect())
}

fn wildcard_case() -> impl Strategy<Value = WildcardCase> {
    (
        package_segments(),
        1usize..7,
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
    )
        .prop_flat_map(|(package, classes, shrink, kotlin, unchanged_extra)| {
            (
                prop::collection::vec(any::<bool>(), classes),
                Just((0..classes).collect::<Vec<_>>()).prop_shuffle(),
            )
                .prop_map(move |(mut used, order)| {
                    if !used.iter().any(|u| *u) {
                        used[0] = true;
                    }
                    WildcardCase {
                        package: package.clone(),
                        classes,
                        used,
                        order,
                        shrink,
                        kotlin,
                        unchanged_extra,
                    }
                })
        })
}

/// Replacing the explicit imports of the used classes of a package by the
/// package wildcard (or the reverse) changes no dependency.
pub fn wildcard_equivalence() -> SuiteResult {
    run(&SEED_WILDCARD, wildcard_case(), |c| {
        let package = format!("org.lib.{}", c.package.join("."));
        let ext = if c.kotlin { "kt" } else { "java" };
        let mut lib = vec![(
            format!("{LIB}/module-info.java"),
            format!("module lib {{\n    exports {package};\n    exports org.lib.shared;\n}}\n"),
        )];
        for i in 0..c.classes {
            let path = format!("{LIB}/{}/C{i}.java", package.replace('.', "/"));
            lib.push((path, class_file(&package, &format!("C{i}"), false)));
        }
        lib.push((
            format!("{LIB}/org/lib/shared/Util.java"),
            class_file("org.lib.shared", "Util", false),
        ));
        lib.push((
            format!("{APP}/module-info.java"),
            "module app {\n    requires lib;\n}\n".into(),
        ));

        let mut used: Vec<String> = c
            .order
            .iter()
            .filter(|i| c.used[**i])
            .map(|i| format!("C{i}"))
            .collect();
        let mut explicit: Vec<String> = used.iter().map(|n| format!("{package}.{n}")).collect();
        let mut wildcard = vec![format!("{package}.*")];
        if c.unchanged_extra {
            explicit.insert(0, "org.lib.shared.Util".into());
            wildcard.insert(0, "org.lib.shared.Util".into());
            used.push("Util".into());
        }
        let (pre_imports, post_imports) = if c.shrink {
            (explicit, wildcard)
        } else {
            (wildcard, explicit)
        };
        let path = format!("{APP}/org/app/Client.{ext}");
        let pre_text = importer(c.kotlin, &pre_imports, &used);
        let post_text = importer(c.kotlin, &post_imports, &used);

        let mut pre_files = lib.clone();
        pre_files.push((path.clone(), pre_text.clone()));
        let mut post_files = lib;
        post_files.push((path.clone(), post_text.clone()));
        let (pre, post) = (model(&pre_files), model(&post_files));
        let fd = delta(&path, ChangeKind::Modified, None, Some(pre_text), Some(post_text));
        let n = normalize(&fd, &pre, &post, &CommitRenames::default());
        prop_assert!(n.is_empty(), "added {:?} removed {:?}", n.added_deps, n.removed_deps);
        Ok(())
    })
}

#[derive(Debug, Clone)]
pub struct RenameCase {
    from: Vec<String>,
    to: Vec<String>,
    classes: usize,
    importers: Vec<(Vec<bool>, bool, bool)>,
    exact: bool,
}

fn rename_case() -> impl Strategy<Value = RenameCase> {
    (package_segments(), package_segments(), 1usize..5, any::<bool>())
        .prop_filter("distinct packages", |(a, b, _, _)| a != b)
        .prop_flat_map(|(from, to, classes, exact)| {
            let importer = (
                prop::collection::vec(any::<bool>(), classes),
                any::<bool>(),
                any::<bool>(),
            );
            prop::collection::vec(importer, 1..4).prop_map(move |importers| RenameCase {
                from: from.clone(),
                to: to.clone(),
                classes,
                importers,
                exact,
            })
        })
}

/// Moving a package to a new path inside its module, and following the
/// move in every importer, changes no importer's dependencies.
pub fn package_rename_neutrality() -> SuiteResult {
    run(&SEED_PACKAGE_RENAME, rename_case(), |c| {
        let (from, to) = (
            format!("org.lib.{}", c.from.join(".")),
            format!("org.lib.{}", c.to.join(".")),
        );
        let descriptor = |p: &str| {
            (
                format!("{LIB}/module-info.java"),
                format!("module lib {{\n    exports {p};\n}}\n"),
            )
        };
        let class_path = |p: &str, i: usize| format!("{LIB}/{}/K{i}.java", p.replace('.', "/"));
        let mut pre_files = vec![
            descriptor(&from),
            (
                format!("{APP}/module-info.java"),
                "module app {\n    requires lib;\n}\n".into(),
            ),
        ];
        let mut post_files = vec![descriptor(&to), pre_files[1].clone()];
        let mut files = vec![delta(
            &descriptor(&to).0,
            ChangeKind::Modified,
            None,
            Some(descriptor(&from).1),
            Some(descriptor(&to).1),
        )];
        for i in 0..c.classes {
            let (old, new) = (class_path(&from, i), class_path(&to, i));
            let (a, b) = (
                class_file(&from, &format!("K{i}"), false),
                class_file(&to, &format!("K{i}"), false),
            );
            pre_files.push((old.clone(), a.clone()));
            post_files.push((new.clone(), b.clone()));
            if c.exact {
                files.push(delta(&new, ChangeKind::Renamed, Some(&old), Some(a), Some(b)));
            } else {
                files.push(delta(&old, ChangeKind::Deleted, None, Some(a), None));
                files.push(delta(&new, ChangeKind::Added, None, None, Some(b)));
            }
        }
        let mut importers = Vec::new();
        for (n, (mask, wildcard, kotlin)) in c.importers.iter().enumerate() {
            let mut used: Vec<String> = (0..c.classes).filter(|i| mask[*i]).map(|i| format!("K{i}")).collect();
            if used.is_empty() {
                used.push("K0".into());
            }
            let imports = |p: &str| -> Vec<String> {
                if *wildcard {
                    vec![format!("{p}.*")]
                } else {
                    used.iter().map(|u| format!("{p}.{u}")).collect()
                }
            };
            let ext = if *kotlin { "kt" } else { "java" };
            let path = format!("{APP}/org/app/User{n}.{ext}");
            let (a, b) = (
                importer(*kotlin, &imports(&from), &used),
                importer(*kotlin, &imports(&to), &used),
            );
            pre_files.push((path.clone(), a.clone()));
            post_files.push((path.clone(), b.clone()));
            let fd = delta(&path, ChangeKind::Modified, None, Some(a), Some(b));
            files.push(fd.clone());
            importers.push(fd);
        }
        let (pre, post) = (model(&pre_files), model(&post_files));
        let commit = CommitDelta {
            commit_id: "c".into(),
            parent_id: Some("p".into()),
            timestamp: Default::default(),
            message: String::new(),
            files,
        };
        let moves = detect_file_moves(
            &commit,
            &pre.index,
            &post.index,
            ToolConfig::default().move_similarity_threshold,
        );
        prop_assert_eq!(moves.len(), c.classes);
        let renames = CommitRenames::from_moves(&moves);
        for fd in &importers {
            let n = normalize(fd, &pre, &post, &renames);
            prop_assert!(
                n.is_empty(),
                "{}: added {:?} removed {:?}",
                fd.path,
                n.added_deps,
                n.removed_deps
            );
        }
        Ok(())
    })
}

fn dir() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "ab", "a-b", "b.c", "src"]), 0..4)
        .prop_map(|v| v.join("/"))
}

fn segments(p: &str) -> Vec<&str> {
    if p.is_empty() {
        Vec::new()
    } else {
        p.split('/').collect()
    }
}

/// Module resolution by path is defined for every path, picks a module
/// exactly when some root contains the path segment-wise, and picks one of
/// the deepest such roots.
pub fn longest_root() -> SuiteResult {
    let case = (
        prop::collection::vec(dir(), 1..7),
        dir(),
        prop::sample::select(vec!["X.java", "Y.kt", "module-info.java"]),
    );
    run(&SEED_LONGEST_ROOT, case, |(roots, path_dir, file)| {
        let layouts: Vec<ModuleLayout> = roots
            .iter()
            .enumerate()
            .map(|(i, r)| ModuleLayout {
                module_name: format!("m{i}"),
                root_dir: r.clone(),
                source_roots: vec![r.clone()],
                descriptor_path: format!("{r}/module-info.java"),
                pattern: None,
            })
            .collect();
        let path = if path_dir.is_empty() {
            file.to_string()
        } else {
            format!("{path_dir}/{file}")
        };
        let path_segs = segments(&path);
        let containing: Vec<usize> = roots
            .iter()
            .map(|r| segments(r))
            .filter(|r| path_segs.len() > r.len() && path_segs[..r.len()] == r[..])
            .map(|r| r.len())
            .collect();
        let got = resolve_module_of_path(&layouts, &path);
        match containing.iter().max() {
            None => prop_assert!(got.is_none(), "{path} resolved to {:?}", got.map(|l| &l.root_dir)),
            Some(depth) => {
                let l = got.ok_or_else(|| TestCaseError::fail(format!("{path} unresolved")))?;
                let root = segments(&l.root_dir);
                prop_assert_eq!(root.len(), *depth);
                prop_assert_eq!(&path_segs[..root.len()], &root[..]);
            }
        }
        Ok(())
    })
}

fn name() -> impl Strategy<Value = String> {
    prop::sample::select(vec![
        "app", "lib.core", "x\"y", "a\\b", "t:ab", "Ünï", "sp ace", "tab\tbed", "m-1",
    ])
    .prop_map(str::to_string)
}

fn record() -> impl Strategy<Value = SliceRecord> {
    (
        1u8..6,
        (name(), name(), prop::option::of(name()), name(), name()),
        (any::<bool>(), any::<bool>(), prop::collection::vec(1usize..500, 0..4)),
        prop::sample::select(vec![
            MemberContext::Added,
            MemberContext::Deleted,
            MemberContext::Modified,
            MemberContext::None,
        ]),
    )
        .prop_map(
            |(category, (sm, sc, member, tm, tc), (connected, ambiguity, lines), member_context)| {
                let relation = match category {
                    2 => Relation::Connected,
                    3 => Relation::Disconnected,
                    _ if connected => Relation::Connected,
                    _ => Relation::Disconnected,
                };
                SliceRecord {
                    category,
                    source_module: Some(sm),
                    source_class: if category == 1 { "module-info".into() } else { sc },
                    member: if category == 1 || category == 5 { None } else { member },
                    member_context,
                    relation: (category != 5).then_some(relation),
                    target_module: (category != 5).then_some(tm),
                    target_class: (category != 1 && category != 5).then_some(tc.clone()),
                    ambiguity,
                    evidence_lines: lines,
                    operation: (category == 1).then(|| format!("MO(requires,{tc})")),
                }
            },
        )
}

fn document() -> impl Strategy<Value = SliceDocument> {
    (
        "[0-9a-f]{40}",
        prop::collection::btree_set(
            prop::sample::select(vec![Criterion::A2aDelta, Criterion::Idsd, Criterion::Mo]),
            0..4,
        ),
        prop::collection::vec(record(), 0..12),
        prop::collection::vec(name(), 0..3),
    )
        .prop_map(|(commit_id, criteria, slices, non_m2m_classes)| SliceDocument {
            verdict: M2MVerdict {
                commit_id: commit_id.clone(),
                is_m2m: !criteria.is_empty(),
                criteria,
                evidence: Vec::new(),
            },
            commit_id,
            slices,
            non_m2m_classes,
        })
}

/// Emitting a document twice gives the same bytes, and re-emitting the
/// parsed text reproduces it.
pub fn emission_determinism() -> SuiteResult {
    run(&SEED_EMISSION, document(), |doc| {
        let first = emit_yaml(&doc);
        let second = emit_yaml(&doc.clone());
        prop_assert_eq!(Sha256::digest(first.as_bytes()), Sha256::digest(second.as_bytes()));
        let parsed =
            parse_yaml(&first, std::path::Path::new("doc.yaml")).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(emit_yaml(&parsed), first);
        Ok(())
    })
}

/// Pool of import lines seen from `org.app`: explicit, wildcard, static,
/// inner-class and external imports, including same-named classes of
/// different packages.
const IMPORT_POOL: &[&str] = &[
    "org.lib.a.One",
    "org.lib.a.Two",
    "org.lib.a.*",
    "org.lib.b.One",
    "org.lib.b.Three",
    "org.lib.b.*",
    "static org.lib.a.Two.make",
    "static org.lib.b.Three.*",
    "org.lib.a.Two.Inner",
    "org.other.One",
    "org.other.*",
    "java.util.List",
    "java.util.*",
    "com.unknown.Thing",
];

/// Every import added or removed by a change is accounted for exactly once
/// by the normalizer: as half of a rename, absorbed by a wildcard event, or
/// as a residual.
pub fn conservation() -> SuiteResult {
    let pool = || prop::collection::btree_set(0..IMPORT_POOL.len(), 0..8);
    let case = (
        pool(),
        pool(),
        prop::collection::btree_set(
            prop::sample::select(vec!["One", "Two", "Three", "List", "Thing", "Inner", "make"]),
            0..5,
        ),
    );
    run(&SEED_CONSERVATION, case, |(pre_set, post_set, names)| {
        let lib = vec![
            (
                format!("{LIB}/module-info.java"),
                "module lib {\n    exports org.lib.a;\n    exports org.lib.b;\n}\n".to_string(),
            ),
            (
                format!("{LIB}/org/lib/a/One.java"),
                class_file("org.lib.a", "One", false),
            ),
            (
                format!("{LIB}/org/lib/a/Two.java"),
                class_file("org.lib.a", "Two", false),
            ),
            (
                format!("{LIB}/org/lib/b/One.java"),
                class_file("org.lib.b", "One", false),
            ),
            (
                format!("{LIB}/org/lib/b/Three.java"),
                class_file("org.lib.b", "Three", false),
            ),
            (
                "other/src/main/java/module-info.java".to_string(),
                "module other {\n    exports org.other;\n}\n".to_string(),
            ),
            (
                "other/src/main/java/org/other/One.java".to_string(),
                class_file("org.other", "One", false),
            ),
            (
                format!("{APP}/module-info.java"),
                "module app {\n    requires lib;\n    requires other;\n}\n".to_string(),
            ),
        ];
        let used: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let text = |set: &BTreeSet<usize>| {
            let imports: Vec<String> = set.iter().map(|i| IMPORT_POOL[*i].to_string()).collect();
            importer(false, &imports, &used)
        };
        let (a, b) = (text(&pre_set), text(&post_set));
        let path = format!("{APP}/org/app/Client.java");
        let mut pre_files = lib.clone();
        pre_files.push((path.clone(), a.clone()));
        let mut post_files = lib;
        post_files.push((path.clone(), b.clone()));
        let (pre, post) = (model(&pre_files), model(&post_files));
        let n = normalize(
            &delta(&path, ChangeKind::Modified, None, Some(a), Some(b)),
            &pre,
            &post,
            &CommitRenames::default(),
        );
        let raw = pre_set.symmetric_difference(&post_set).count();
        prop_assert_eq!(n.raw_removed + n.raw_added, raw);
        prop_assert!(
            n.conserves(),
            "removed {} added {} renames {} absorbed {} residuals {}",
            n.raw_removed,
            n.raw_added,
            n.renames.len(),
            n.wildcard_absorbed,
            n.residuals
        );
        Ok(())
    })
}

/// Every suite, by letter.
pub fn all() -> BTreeMap<char, (&'static str, SuiteResult)> {
    BTreeMap::from([
        ('a', ("wildcard expand/shrink equivalence", wildcard_equivalence())),
        ('b', ("package-path rename neutrality", package_rename_neutrality())),
        ('c', ("longest-root module resolution", longest_root())),
        ('d', ("emission determinism", emission_determinism())),
        ('e', ("normalizer conservation", conservation())),
    ])
}

pub fn seed_hex(seed: &[u8; 32]) -> String {
    seed.iter().map(|b| format!("{b:02x}")).collect()
}
