//! Tool configuration, YAML documents and the precision/recall harness.

mod config;
mod eval;
mod yaml;

pub use config::ToolConfig;
pub use eval::{
    commit_items, evaluate, format_ratio, instance_items, load_documents, table_row, EvalReport, Granularity,
};
pub use yaml::{emit_yaml, parse_yaml, SCHEMA_VERSION};
