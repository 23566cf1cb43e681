//! Detection and structural slicing of module-level architectural changes in
//! JPMS-style Java and Kotlin repositories.
//!
//! The pipeline never compiles anything. Every fact is recovered from diff
//! text, file images and the directory/naming structure of the repository:
//!
//! - [`vcs`] walks git history and materializes per-commit file deltas.
//! - [`lexical`] pulls imports, packages, descriptors and method spans out of
//!   comment-stripped source text.
//! - [`resolver`] discovers module layouts and builds the class index.
//! - [`normalize`] turns raw import diffs into true dependency deltas.
//! - [`detect`] decides whether a commit is a module-to-module change.
//! - [`slice`] decomposes such commits into structural slices.
//! - [`report`] handles configuration, YAML emission and evaluation.
//!
//! [`pipeline`] ties the stages together for a whole repository.

pub mod detect;
pub mod diag;
pub mod error;
pub mod lexical;
pub mod normalize;
pub mod pipeline;
pub mod report;
pub mod resolver;
pub mod slice;
pub mod vcs;

pub use diag::{Diagnostic, Diagnostics};
pub use error::{Error, Result};
