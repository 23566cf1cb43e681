//! Scripted git repositories used as test corpus, each commit labelled
//! with the verdict, criteria and instance count a reviewer assigned by
//! hand.
//!
//! Repositories are materialized with fixed signatures and timestamps, so
//! commit ids are identical across runs and machines.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use git2::{IndexAddOption, Repository, Signature, Time};

mod azure;
mod bach;
mod imports;
mod layouts;

pub use azure::SAS_TOKEN_LINE;

/// One edit of the working tree.
#[derive(Debug, Clone)]
pub enum Change {
    Write(String, String),
    Delete(String),
    /// Moves a file, optionally replacing its content.
    Rename(String, String, Option<String>),
}

impl Change {
    pub fn write(path: impl Into<String>, content: impl Into<String>) -> Change {
        Change::Write(path.into(), content.into())
    }

    pub fn delete(path: impl Into<String>) -> Change {
        Change::Delete(path.into())
    }

    pub fn rename(from: impl Into<String>, to: impl Into<String>, content: Option<String>) -> Change {
        Change::Rename(from.into(), to.into(), content)
    }
}

/// Hand-assigned labels of a commit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expect {
    /// Whether the commit passes the structural pre-filter.
    pub structural: bool,
    pub m2m: bool,
    pub criteria: Vec<&'static str>,
    /// Number of changed paths git reports (an exact rename counts once).
    pub files: usize,
    /// Distinct slice instances.
    pub instances: usize,
    /// Table rows (observed layout and naming hazards) the commit exercises.
    pub rows: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct FixtureCommit {
    pub label: &'static str,
    pub message: &'static str,
    pub changes: Vec<Change>,
    pub expect: Expect,
}

#[derive(Debug, Clone)]
pub struct FixtureRepo {
    pub name: &'static str,
    pub commits: Vec<FixtureCommit>,
    pub extra_layouts: Vec<&'static str>,
    pub aliases: Vec<(&'static str, &'static str)>,
    /// Paths in the tree of the last commit.
    pub head_paths: usize,
    /// Directives of every descriptor at the last commit, rendered as in
    /// source (`requires transitive a`, `exports p to m`, ...).
    pub descriptors: Vec<(&'static str, Vec<&'static str>)>,
}

impl FixtureRepo {
    pub fn commit(&self, label: &str) -> Option<(usize, &FixtureCommit)> {
        self.commits.iter().enumerate().find(|(_, c)| c.label == label)
    }
}

/// A materialized fixture: the repository path and the id of each commit,
/// in order.
#[derive(Debug, Clone)]
pub struct Materialized {
    pub path: PathBuf,
    pub commit_ids: Vec<String>,
}

impl Materialized {
    pub fn id_of(&self, repo: &FixtureRepo, label: &str) -> Option<&str> {
        repo.commit(label).map(|(i, _)| self.commit_ids[i].as_str())
    }
}

const EPOCH: i64 = 1_577_836_800;

/// Creates `root/<name>` and replays the fixture's commits into it.
pub fn materialize(repo: &FixtureRepo, root: &Path) -> Result<Materialized, git2::Error> {
    let dir = root.join(repo.name);
    fs::create_dir_all(&dir).map_err(io_err)?;
    let git = Repository::init(&dir)?;
    let mut ids = Vec::new();
    let mut parent: Option<git2::Oid> = None;
    for (i, commit) in repo.commits.iter().enumerate() {
        let mut index = git.index()?;
        for change in &commit.changes {
            match change {
                Change::Write(path, content) => write_file(&dir, path, content)?,
                Change::Delete(path) => remove_file(&dir, path, &mut index)?,
                Change::Rename(from, to, content) => {
                    let text = match content {
                        Some(c) => c.clone(),
                        None => fs::read_to_string(dir.join(from)).map_err(io_err)?,
                    };
                    remove_file(&dir, from, &mut index)?;
                    write_file(&dir, to, &text)?;
                }
            }
        }
        index.add_all(["*"].iter(), IndexAddOption::DEFAULT, None)?;
        index.update_all(["*"].iter(), None)?;
        index.write()?;
        let tree = git.find_tree(index.write_tree()?)?;
        let sig = Signature::new(
            "Fixture Author",
            "fixture@example.invalid",
            &Time::new(EPOCH + i as i64 * 86_400, 0),
        )?;
        let parents: Vec<git2::Commit> = parent.iter().map(|p| git.find_commit(*p)).collect::<Result<_, _>>()?;
        let parent_refs: Vec<&git2::Commit> = parents.iter().collect();
        let oid = git.commit(Some("HEAD"), &sig, &sig, commit.message, &tree, &parent_refs)?;
        ids.push(oid.to_string());
        parent = Some(oid);
    }
    Ok(Materialized {
        path: dir,
        commit_ids: ids,
    })
}

fn io_err(e: std::io::Error) -> git2::Error {
    git2::Error::from_str(&e.to_string())
}

fn write_file(dir: &Path, path: &str, content: &str) -> Result<(), git2::Error> {
    let full = dir.join(path);
    if let Some(parent) = full.parent() {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    fs::write(full, content).map_err(io_err)
}

fn remove_file(dir: &Path, path: &str, index: &mut git2::Index) -> Result<(), git2::Error> {
    fs::remove_file(dir.join(path)).map_err(io_err)?;
    index.remove_path(Path::new(path))
}

/// Every fixture repository.
pub fn corpus() -> Vec<FixtureRepo> {
    vec![azure::repo(), imports::repo(), layouts::repo(), bach::repo()]
}

pub fn by_name(name: &str) -> Option<FixtureRepo> {
    corpus().into_iter().find(|r| r.name == name)
}

/// Table rows covered by the whole corpus.
pub fn covered_rows() -> BTreeSet<u8> {
    corpus()
        .iter()
        .flat_map(|r| r.commits.iter().flat_map(|c| c.expect.rows.iter().copied()))
        .collect()
}

/// Source text from an indented block: drops the first newline.
pub(crate) fn text(block: &str) -> String {
    block.strip_prefix('\n').unwrap_or(block).to_string()
}

pub(crate) fn expect(
    structural: bool,
    criteria: &[&'static str],
    files: usize,
    instances: usize,
    rows: &[u8],
) -> Expect {
    Expect {
        structural,
        m2m: !criteria.is_empty(),
        criteria: criteria.to_vec(),
        files,
        instances,
        rows: rows.to_vec(),
    }
}

pub(crate) const A2A: &str = "A2A_DELTA";
pub(crate) const IDSD: &str = "IDSD";
pub(crate) const MO: &str = "MO";
