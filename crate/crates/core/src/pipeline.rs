//! End-to-end analysis of commits: snapshot models, normalization,
//! detection and slicing.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::rc::Rc;

use crate::detect::{classify_m2m, descriptor_diffs, detect_a2a_delta, detect_idsd, detect_mo, Criterion, M2MVerdict};
use crate::diag::{Diagnostic, Diagnostics};
use crate::error::Result;
use crate::lexical::{
    is_class_source, is_descriptor_path, parse_module_descriptor_reporting, strip_comments, Language, ModuleDescriptor,
};
use crate::normalize::{detect_file_moves, normalize_import_delta, CommitRenames, FileMove};
use crate::report::ToolConfig;
use crate::resolver::{build_class_index, discover_modules, ClassIndex, FileFacts};
use crate::slice::{generate_slices, ClassChange, ClassChangeKind, DescriptorTexts, SliceDocument};
use crate::vcs::{is_structural_candidate, ChangeKind, CommitDelta, FileDelta, GitRepo, Snapshot, WalkOptions};

/// Module model of one revision.
#[derive(Debug, Clone, Default)]
pub struct SnapshotModel {
    pub commit_id: Option<String>,
    pub listing: Vec<String>,
    pub sources: BTreeMap<String, String>,
    pub descriptors: BTreeMap<String, ModuleDescriptor>,
    pub index: ClassIndex,
    pub diagnostics: Diagnostics,
}

impl SnapshotModel {
    pub fn build(snapshot: Snapshot, config: &ToolConfig) -> SnapshotModel {
        let mut diags = Diagnostics::new();
        let mut descriptors = BTreeMap::new();
        let mut facts = BTreeMap::new();
        for (path, text) in &snapshot.sources {
            if is_descriptor_path(path) {
                match parse_module_descriptor_reporting(&strip_comments(text), &mut diags) {
                    Ok(d) => {
                        descriptors.insert(path.clone(), d);
                    }
                    Err(e) => {
                        diags.push(Diagnostic::new("unparseable-descriptor", e.to_string()).in_file(path.clone()))
                    }
                }
            } else if accepted(path, config) {
                facts.insert(path.clone(), FileFacts::from_source(path, text));
            }
        }
        let layouts = discover_modules(&snapshot.listing, &descriptors, &config.extra_layouts, &mut diags);
        let indexed: Vec<String> = snapshot
            .listing
            .iter()
            .filter(|p| accepted(p, config))
            .cloned()
            .collect();
        let index = build_class_index(&layouts, &indexed, &facts);
        SnapshotModel {
            commit_id: snapshot.commit_id,
            listing: snapshot.listing,
            sources: snapshot.sources,
            descriptors,
            index,
            diagnostics: diags,
        }
    }
}

fn accepted(path: &str, config: &ToolConfig) -> bool {
    is_class_source(path) && Language::of_path(path).is_some_and(|l| config.accepts(l))
}

/// Everything computed for one commit.
#[derive(Debug, Clone)]
pub struct CommitAnalysis {
    pub commit_id: String,
    pub verdict: M2MVerdict,
    pub document: SliceDocument,
    pub moves: Vec<FileMove>,
    pub changes: Vec<ClassChange>,
    pub diagnostics: Diagnostics,
}

/// Slicer-level view of a commit's class files: moves are paired, and
/// cross-module moves split into a deletion and an addition.
pub fn class_changes(commit: &CommitDelta, moves: &[FileMove], config: &ToolConfig) -> Vec<ClassChange> {
    let by_new: BTreeMap<&str, &FileMove> = moves.iter().map(|m| (m.new_path.as_str(), m)).collect();
    let moved_old: BTreeMap<&str, &FileMove> = moves.iter().map(|m| (m.old_path.as_str(), m)).collect();
    let pre_image_of = |path: &str| {
        commit
            .files
            .iter()
            .find(|f| f.pre_path() == path && f.pre_image.is_some())
            .and_then(|f| f.pre_image.clone())
    };
    let mut out = Vec::new();
    let mut push = |kind, path: &str, pre_path: Option<&str>, pre: Option<String>, post: Option<String>| {
        out.push(ClassChange {
            kind,
            path: path.to_string(),
            pre_path: pre_path.map(str::to_string),
            pre_image: pre,
            post_image: post,
            delta: Default::default(),
        });
    };
    for f in &commit.files {
        let new_ok = accepted(&f.path, config) && f.post_image.is_some();
        let old_ok = accepted(f.pre_path(), config) && f.pre_image.is_some();
        if let Some(m) = by_new.get(f.path.as_str()) {
            let pre = pre_image_of(&m.old_path);
            if m.is_cross_module() {
                push(ClassChangeKind::Deleted, &m.old_path, Some(&m.old_path), pre, None);
                push(ClassChangeKind::Added, &f.path, None, None, f.post_image.clone());
            } else {
                push(
                    ClassChangeKind::Modified,
                    &f.path,
                    Some(&m.old_path),
                    pre,
                    f.post_image.clone(),
                );
            }
            continue;
        }
        if moved_old.contains_key(f.pre_path()) && f.change_kind == ChangeKind::Deleted {
            continue;
        }
        match f.change_kind {
            ChangeKind::Added if new_ok => push(ClassChangeKind::Added, &f.path, None, None, f.post_image.clone()),
            ChangeKind::Deleted if old_ok => push(
                ClassChangeKind::Deleted,
                &f.path,
                Some(&f.path),
                f.pre_image.clone(),
                None,
            ),
            ChangeKind::Modified if new_ok => push(
                ClassChangeKind::Modified,
                &f.path,
                Some(&f.path),
                f.pre_image.clone(),
                f.post_image.clone(),
            ),
            ChangeKind::Renamed => {
                if old_ok {
                    push(
                        ClassChangeKind::Deleted,
                        f.pre_path(),
                        Some(f.pre_path()),
                        f.pre_image.clone(),
                        None,
                    );
                }
                if new_ok {
                    push(ClassChangeKind::Added, &f.path, None, None, f.post_image.clone());
                }
            }
            _ => {}
        }
    }
    out
}

/// Analyses a commit given the models of its parent and of itself.
pub fn analyze_with_models(
    commit: &CommitDelta,
    pre: &SnapshotModel,
    post: &SnapshotModel,
    config: &ToolConfig,
) -> CommitAnalysis {
    let mut diags = Diagnostics::new();
    let relevant = CommitDelta {
        files: commit
            .files
            .iter()
            .filter(|f| {
                is_descriptor_path(&f.path)
                    || is_descriptor_path(f.pre_path())
                    || accepted(&f.path, config)
                    || accepted(f.pre_path(), config)
            })
            .cloned()
            .collect(),
        ..commit.clone()
    };
    let moves = detect_file_moves(&relevant, &pre.index, &post.index, config.move_similarity_threshold);
    let renames = CommitRenames::from_moves(&moves);
    let mut changes = class_changes(&relevant, &moves, config);
    for change in &mut changes {
        let delta = FileDelta {
            path: change.path.clone(),
            change_kind: match change.kind {
                ClassChangeKind::Added => ChangeKind::Added,
                ClassChangeKind::Deleted => ChangeKind::Deleted,
                ClassChangeKind::Modified => ChangeKind::Modified,
            },
            old_path: change.pre_path.clone().filter(|p| *p != change.path),
            hunks: Vec::new(),
            pre_image: change.pre_image.clone(),
            post_image: change.post_image.clone(),
        };
        change.delta = normalize_import_delta(&delta, &pre.index, &post.index, &renames, &mut diags);
    }
    let deltas: Vec<_> = changes.iter().map(|c| c.delta.clone()).collect();
    let descriptors = descriptor_diffs(&relevant, &mut diags);

    let mut evidence = detect_a2a_delta(&relevant, &pre.index, &post.index, &moves);
    evidence.extend(detect_idsd(&deltas, &post.index, &pre.index));
    evidence.extend(detect_mo(&descriptors));
    let verdict = classify_m2m(&commit.commit_id, evidence, config.ambiguity_mode);

    let texts: DescriptorTexts<'_> = relevant
        .files
        .iter()
        .filter(|f| is_descriptor_path(&f.path) || is_descriptor_path(f.pre_path()))
        .map(|f| (f.path.as_str(), (f.pre_image.as_deref(), f.post_image.as_deref())))
        .collect();
    let document = generate_slices(&verdict, &changes, &descriptors, &texts, &pre.index, &post.index);
    CommitAnalysis {
        commit_id: commit.commit_id.clone(),
        verdict,
        document,
        moves,
        changes,
        diagnostics: diags,
    }
}

/// Repository-bound analyser with a small cache of snapshot models.
pub struct Analyzer {
    repo: GitRepo,
    config: ToolConfig,
    cache: HashMap<String, Rc<SnapshotModel>>,
    empty: Rc<SnapshotModel>,
}

const CACHE_LIMIT: usize = 8;

impl Analyzer {
    pub fn open(path: impl AsRef<Path>, config: ToolConfig) -> Result<Analyzer> {
        config.validate()?;
        let repo = GitRepo::open(path)?;
        let empty = Rc::new(SnapshotModel::build(Snapshot::default(), &config));
        Ok(Analyzer {
            repo,
            config,
            cache: HashMap::new(),
            empty,
        })
    }

    pub fn repo(&self) -> &GitRepo {
        &self.repo
    }

    pub fn config(&self) -> &ToolConfig {
        &self.config
    }

    pub fn model(&mut self, rev: Option<&str>) -> Result<Rc<SnapshotModel>> {
        let Some(rev) = rev else {
            return Ok(self.empty.clone());
        };
        if let Some(m) = self.cache.get(rev) {
            return Ok(m.clone());
        }
        let model = Rc::new(SnapshotModel::build(self.repo.snapshot(Some(rev))?, &self.config));
        if self.cache.len() >= CACHE_LIMIT {
            self.cache.clear();
        }
        self.cache.insert(rev.to_string(), model.clone());
        Ok(model)
    }

    pub fn analyze(&mut self, commit: &CommitDelta) -> Result<CommitAnalysis> {
        let pre = self.model(commit.parent_id.as_deref())?;
        let post = self.model(Some(&commit.commit_id))?;
        Ok(analyze_with_models(commit, &pre, &post, &self.config))
    }

    /// Looks a commit up by revision and analyses it.
    pub fn analyze_rev(&mut self, rev: &str) -> Result<CommitAnalysis> {
        let commit = self.repo.commit(rev)?;
        self.analyze(&commit)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectRow {
    pub commit_id: String,
    pub is_m2m: bool,
    pub criteria: Vec<Criterion>,
}

impl DetectRow {
    /// `<id> m2m=<bool> criteria=<A,B|->`
    pub fn render(&self) -> String {
        let criteria = if self.criteria.is_empty() {
            "-".to_string()
        } else {
            self.criteria.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(",")
        };
        format!("{} m2m={} criteria={}", self.commit_id, self.is_m2m, criteria)
    }
}

/// Verdicts for every structural candidate of the walked range.
pub fn detect_repo(repo_path: impl AsRef<Path>, opts: &WalkOptions, config: &ToolConfig) -> Result<Vec<DetectRow>> {
    let mut analyzer = Analyzer::open(repo_path, config.clone())?;
    let commits = analyzer.repo().walk_commits(opts)?;
    let mut rows = Vec::new();
    for commit in commits.iter().filter(|c| is_structural_candidate(c)) {
        let analysis = analyzer.analyze(commit)?;
        rows.push(DetectRow {
            commit_id: commit.commit_id.clone(),
            is_m2m: analysis.verdict.is_m2m,
            criteria: analysis.verdict.criteria.iter().copied().collect(),
        });
    }
    Ok(rows)
}

/// `N/M M2M`
pub fn detect_summary(rows: &[DetectRow]) -> String {
    format!("{}/{} M2M", rows.iter().filter(|r| r.is_m2m).count(), rows.len())
}
