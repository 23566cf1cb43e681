//! Shared helpers for integration tests over the fixture corpus.

#![allow(dead_code)]

pub mod oracle;
pub mod props;

use archslicer::report::ToolConfig;
use archslicer_fixtures::{corpus, materialize, FixtureRepo, Materialized};
use tempfile::TempDir;

pub struct Corpus {
    _dir: TempDir,
    pub repos: Vec<(FixtureRepo, Materialized)>,
}

impl Corpus {
    pub fn repo(&self, name: &str) -> &(FixtureRepo, Materialized) {
        self.repos.iter().find(|(r, _)| r.name == name).expect("fixture exists")
    }
}

pub fn materialize_corpus() -> Corpus {
    let dir = TempDir::new().expect("temp dir");
    let repos = corpus()
        .into_iter()
        .map(|r| {
            let m = materialize(&r, dir.path()).expect("fixture materializes");
            (r, m)
        })
        .collect();
    Corpus { _dir: dir, repos }
}

pub fn config_for(repo: &FixtureRepo) -> ToolConfig {
    ToolConfig {
        extra_layouts: repo.extra_layouts.iter().map(|s| s.to_string()).collect(),
        alias_map: repo
            .aliases
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
        ..ToolConfig::default()
    }
}
