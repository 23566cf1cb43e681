//! Git history walking and per-commit file deltas.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{DateTime, TimeZone, Utc};
use git2::{Delta, DiffOptions, ObjectType, Oid, Patch, Repository, Sort, Tree, TreeWalkMode, TreeWalkResult};

use crate::error::{Error, Result};
use crate::lexical::{is_descriptor_path, Language};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ChangeKind {
    Added,
    Deleted,
    Modified,
    Renamed,
}

/// A contiguous change region. Line numbers are 1-based; a zero-length side
/// uses git's convention of pointing at the line before the insertion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hunk {
    pub old_start: usize,
    pub old_lines: usize,
    pub new_start: usize,
    pub new_lines: usize,
    pub removed: Vec<(usize, String)>,
    pub added: Vec<(usize, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileDelta {
    pub path: String,
    pub change_kind: ChangeKind,
    pub old_path: Option<String>,
    pub hunks: Vec<Hunk>,
    pub pre_image: Option<String>,
    pub post_image: Option<String>,
}

impl FileDelta {
    /// Path of the file before the change.
    pub fn pre_path(&self) -> &str {
        self.old_path.as_deref().unwrap_or(&self.path)
    }

    pub fn changed_lines(&self) -> impl Iterator<Item = &str> {
        self.hunks
            .iter()
            .flat_map(|h| h.removed.iter().chain(h.added.iter()))
            .map(|(_, text)| text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitDelta {
    pub commit_id: String,
    /// First parent; `None` for a root commit (diffed against the empty tree).
    pub parent_id: Option<String>,
    pub timestamp: DateTime<Utc>,
    pub message: String,
    pub files: Vec<FileDelta>,
}

/// Which part of history to walk.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum RevRange {
    /// Everything reachable from HEAD.
    #[default]
    All,
    /// A git revision (`abc123`, `main`) or range (`A..B`).
    Spec(String),
}

impl RevRange {
    pub fn parse(spec: Option<&str>) -> RevRange {
        match spec {
            None | Some("all") => RevRange::All,
            Some(s) => RevRange::Spec(s.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct WalkOptions {
    pub range: RevRange,
    pub since: Option<DateTime<Utc>>,
    pub until: Option<DateTime<Utc>>,
}

/// File contents of one revision.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    pub commit_id: Option<String>,
    /// Every path in the tree, sorted.
    pub listing: Vec<String>,
    /// Text of every `.java` / `.kt` file.
    pub sources: BTreeMap<String, String>,
}

/// Only Java and Kotlin sources (descriptors included) are materialized.
pub fn is_tracked_source(path: &str) -> bool {
    Language::of_path(path).is_some() || is_descriptor_path(path)
}

/// A readable git repository.
pub struct GitRepo {
    repo: Repository,
    path: PathBuf,
}

impl GitRepo {
    pub fn open(path: impl AsRef<Path>) -> Result<GitRepo> {
        let path = path.as_ref().to_path_buf();
        let repo = Repository::open(&path).map_err(|source| Error::OpenRepository {
            path: path.clone(),
            source,
        })?;
        Ok(GitRepo { repo, path })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn resolve_commit(&self, rev: &str) -> Result<git2::Commit<'_>> {
        self.repo
            .revparse_single(rev)
            .and_then(|o| o.peel_to_commit())
            .map_err(|_| Error::UnknownRevision { rev: rev.to_string() })
    }

    /// Commits of the range, oldest first, each diffed against its first parent.
    pub fn walk_commits(&self, opts: &WalkOptions) -> Result<Vec<CommitDelta>> {
        let mut walk = self.repo.revwalk()?;
        walk.set_sorting(Sort::TOPOLOGICAL | Sort::REVERSE)?;
        match &opts.range {
            RevRange::All => match self.repo.head() {
                Ok(head) => {
                    let id = head.peel_to_commit()?.id();
                    walk.push(id)?;
                }
                // unborn HEAD: nothing to walk
                Err(e) if e.code() == git2::ErrorCode::UnbornBranch => return Ok(Vec::new()),
                Err(e) if e.code() == git2::ErrorCode::NotFound => return Ok(Vec::new()),
                Err(e) => return Err(e.into()),
            },
            RevRange::Spec(spec) => {
                let bad = |source| Error::BadRange {
                    range: spec.clone(),
                    source,
                };
                if spec.contains("..") {
                    walk.push_range(spec).map_err(bad)?;
                } else {
                    let id = self
                        .repo
                        .revparse_single(spec)
                        .and_then(|o| o.peel_to_commit())
                        .map_err(bad)?
                        .id();
                    walk.push(id)?;
                }
            }
        }

        let mut out = Vec::new();
        for oid in walk {
            let commit = self.repo.find_commit(oid?)?;
            let timestamp = Utc
                .timestamp_opt(commit.time().seconds(), 0)
                .single()
                .unwrap_or_default();
            if opts.since.is_some_and(|s| timestamp < s) || opts.until.is_some_and(|u| timestamp > u) {
                continue;
            }
            out.push(self.commit_delta(&commit)?);
        }
        Ok(out)
    }

    /// The delta of a single commit against its first parent.
    pub fn commit(&self, rev: &str) -> Result<CommitDelta> {
        let commit = self.resolve_commit(rev)?;
        self.commit_delta(&commit)
    }

    fn commit_delta(&self, commit: &git2::Commit<'_>) -> Result<CommitDelta> {
        let parent = if commit.parent_count() > 0 {
            Some(commit.parent(0)?)
        } else {
            None
        };
        let parent_tree = parent.as_ref().map(|p| p.tree()).transpose()?;
        let tree = commit.tree()?;
        let files = self.diff_trees(parent_tree.as_ref(), &tree)?;
        Ok(CommitDelta {
            commit_id: commit.id().to_string(),
            parent_id: parent.map(|p| p.id().to_string()),
            timestamp: Utc
                .timestamp_opt(commit.time().seconds(), 0)
                .single()
                .unwrap_or_default(),
            message: commit.message().unwrap_or("").to_string(),
            files,
        })
    }

    fn blob_text(&self, id: Oid) -> Result<Option<String>> {
        if id.is_zero() {
            return Ok(None);
        }
        let blob = self.repo.find_blob(id)?;
        Ok(Some(String::from_utf8_lossy(blob.content()).into_owned()))
    }

    fn diff_trees(&self, old: Option<&Tree<'_>>, new: &Tree<'_>) -> Result<Vec<FileDelta>> {
        let mut opts = DiffOptions::new();
        opts.context_lines(0);
        let diff = self.repo.diff_tree_to_tree(old, Some(new), Some(&mut opts))?;

        let mut files = Vec::new();
        let mut blob_ids: Vec<(Oid, Oid)> = Vec::new();
        for (idx, delta) in diff.deltas().enumerate() {
            let change_kind = match delta.status() {
                Delta::Added => ChangeKind::Added,
                Delta::Deleted => ChangeKind::Deleted,
                Delta::Modified => ChangeKind::Modified,
                _ => continue,
            };
            let file = match change_kind {
                ChangeKind::Deleted => delta.old_file(),
                _ => delta.new_file(),
            };
            let Some(path) = file.path().and_then(|p| p.to_str()).map(str::to_string) else {
                continue;
            };
            let tracked = is_tracked_source(&path);
            let mut hunks = Vec::new();
            if let Some(patch) = Patch::from_diff(&diff, idx)? {
                for h in 0..patch.num_hunks() {
                    let (header, n_lines) = patch.hunk(h)?;
                    let mut hunk = Hunk {
                        old_start: header.old_start() as usize,
                        old_lines: header.old_lines() as usize,
                        new_start: header.new_start() as usize,
                        new_lines: header.new_lines() as usize,
                        removed: Vec::new(),
                        added: Vec::new(),
                    };
                    for l in 0..n_lines {
                        let line = patch.line_in_hunk(h, l)?;
                        let text = String::from_utf8_lossy(line.content())
                            .trim_end_matches(['\n', '\r'])
                            .to_string();
                        match line.origin() {
                            '-' => hunk.removed.push((line.old_lineno().unwrap_or(0) as usize, text)),
                            '+' => hunk.added.push((line.new_lineno().unwrap_or(0) as usize, text)),
                            _ => {}
                        }
                    }
                    hunks.push(hunk);
                }
            }
            blob_ids.push((delta.old_file().id(), delta.new_file().id()));
            files.push(FileDelta {
                path,
                change_kind,
                old_path: None,
                hunks,
                pre_image: if tracked {
                    self.blob_text(delta.old_file().id())?
                } else {
                    None
                },
                post_image: if tracked {
                    self.blob_text(delta.new_file().id())?
                } else {
                    None
                },
            });
        }
        Ok(pair_exact_renames(files, &blob_ids))
    }

    /// Sorted list of every path in the tree of `rev`.
    pub fn listing(&self, rev: &str) -> Result<Vec<String>> {
        let tree = self.resolve_commit(rev)?.tree()?;
        let mut paths = Vec::new();
        walk_tree(&tree, |path, _| paths.push(path))?;
        paths.sort();
        Ok(paths)
    }

    /// Listing plus the text of every source file at `rev`; `None` gives the
    /// empty snapshot that precedes a root commit.
    pub fn snapshot(&self, rev: Option<&str>) -> Result<Snapshot> {
        let Some(rev) = rev else {
            return Ok(Snapshot::default());
        };
        let commit = self.resolve_commit(rev)?;
        let tree = commit.tree()?;
        let mut entries = Vec::new();
        walk_tree(&tree, |path, id| entries.push((path, id)))?;
        entries.sort();
        let mut sources = BTreeMap::new();
        for (path, id) in &entries {
            if is_tracked_source(path) {
                if let Some(text) = self.blob_text(*id)? {
                    sources.insert(path.clone(), text);
                }
            }
        }
        Ok(Snapshot {
            commit_id: Some(commit.id().to_string()),
            listing: entries.into_iter().map(|(p, _)| p).collect(),
            sources,
        })
    }
}

fn walk_tree(tree: &Tree<'_>, mut f: impl FnMut(String, Oid)) -> Result<()> {
    tree.walk(TreeWalkMode::PreOrder, |dir, entry| {
        if entry.kind() == Some(ObjectType::Blob) {
            if let Some(name) = entry.name() {
                f(format!("{dir}{name}"), entry.id());
            }
        }
        TreeWalkResult::Ok
    })?;
    Ok(())
}

/// A deleted and an added file with identical content become one rename.
fn pair_exact_renames(files: Vec<FileDelta>, blob_ids: &[(Oid, Oid)]) -> Vec<FileDelta> {
    let mut added: BTreeMap<Oid, Vec<usize>> = BTreeMap::new();
    for (i, f) in files.iter().enumerate() {
        if f.change_kind == ChangeKind::Added {
            added.entry(blob_ids[i].1).or_default().push(i);
        }
    }
    let mut consumed = vec![false; files.len()];
    let mut renamed_to: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, f) in files.iter().enumerate() {
        if f.change_kind != ChangeKind::Deleted {
            continue;
        }
        if let Some(cands) = added.get_mut(&blob_ids[i].0) {
            if let Some(pos) = cands.iter().position(|&j| !consumed[j]) {
                let j = cands.remove(pos);
                consumed[j] = true;
                consumed[i] = true;
                renamed_to.insert(j, i);
            }
        }
    }
    let mut out = Vec::with_capacity(files.len());
    for (j, f) in files.iter().enumerate() {
        if let Some(&i) = renamed_to.get(&j) {
            let old = &files[i];
            out.push(FileDelta {
                path: f.path.clone(),
                change_kind: ChangeKind::Renamed,
                old_path: Some(old.path.clone()),
                hunks: Vec::new(),
                pre_image: old.pre_image.clone(),
                post_image: f.post_image.clone(),
            });
        } else if !consumed[j] {
            out.push(f.clone());
        }
    }
    out.sort_by(|a, b| a.path.cmp(&b.path));
    out
}

/// Walks `repo_path` and returns the commits of the range, oldest first.
pub fn walk_commits(repo_path: impl AsRef<Path>, opts: &WalkOptions) -> Result<Vec<CommitDelta>> {
    GitRepo::open(repo_path)?.walk_commits(opts)
}

/// Sorted file listing of the tree at `commit_id`.
pub fn load_snapshot_listing(repo_path: impl AsRef<Path>, commit_id: &str) -> Result<Vec<String>> {
    GitRepo::open(repo_path)?.listing(commit_id)
}

fn touches_structure(line: &str) -> bool {
    let t = line.trim_start();
    let starts_kw = |kw: &str| {
        t.strip_prefix(kw)
            .is_some_and(|rest| rest.starts_with(char::is_whitespace))
    };
    if starts_kw("package") || starts_kw("import") {
        return true;
    }
    structural_line_re().is_match(t)
}

fn structural_line_re() -> &'static regex::Regex {
    use std::sync::OnceLock;
    static RE: OnceLock<regex::Regex> = OnceLock::new();
    RE.get_or_init(|| {
        regex::Regex::new(concat!(
            // type declarations
            r"^(?:(?:public|protected|private|internal|abstract|final|static|sealed|open|data|enum|annotation|inner|value)\s+)*",
            r"(?:class|interface|enum|record|object|@interface)\s+[A-Za-z_$]",
            r"|\bfun\s+[^(]*\(",
            // Java method signatures: modifiers or a type, then name(
            r"|^(?:(?:public|protected|private|abstract|final|static|synchronized|native|default)\s+)+[\w$<>\[\],.?\s]*?[A-Za-z_$][\w$]*\s*\(",
            r"|^[\w$<>\[\],.?]+\s+[A-Za-z_$][\w$]*\s*\([^;]*\)\s*(?:throws\s+[\w$.,\s]+)?\{?\s*$",
        ))
        .unwrap()
    })
}

/// Whether a commit may contain a module-level change and is worth analysing.
///
/// True when the commit touches a `module-info.java`, adds, deletes or
/// renames a Java/Kotlin file, or edits a package, import, type or method
/// signature line of one.
pub fn is_structural_candidate(delta: &CommitDelta) -> bool {
    delta.files.iter().any(|f| {
        if is_descriptor_path(&f.path) || f.old_path.as_deref().is_some_and(is_descriptor_path) {
            return true;
        }
        if Language::of_path(&f.path).is_none() {
            return false;
        }
        match f.change_kind {
            ChangeKind::Added | ChangeKind::Deleted | ChangeKind::Renamed => true,
            ChangeKind::Modified => f.changed_lines().any(touches_structure),
        }
    })
}

/// Replays the hunks of a modified file on its pre-image, line by line.
pub fn apply_hunks(pre_image: &str, hunks: &[Hunk]) -> Vec<String> {
    let pre: Vec<&str> = pre_image.lines().collect();
    let mut out: Vec<String> = Vec::new();
    let mut next = 1usize; // next unread pre line
    for h in hunks {
        // lines before the hunk, and for pure insertions the anchor line too
        let copy_until = if h.old_lines == 0 { h.old_start } else { h.old_start - 1 };
        while next <= copy_until && next <= pre.len() {
            out.push(pre[next - 1].to_string());
            next += 1;
        }
        next += h.old_lines;
        out.extend(h.added.iter().map(|(_, t)| t.clone()));
    }
    while next <= pre.len() {
        out.push(pre[next - 1].to_string());
        next += 1;
    }
    out
}
