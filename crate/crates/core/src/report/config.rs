use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::detect::AmbiguityMode;
use crate::error::{Error, Result};
use crate::lexical::Language;
use crate::normalize::DEFAULT_MOVE_THRESHOLD;
use crate::resolver::validate_layout_pattern;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToolConfig {
    /// Source-root patterns tried after the built-in layouts.
    pub extra_layouts: Vec<String>,
    pub move_similarity_threshold: f64,
    pub ambiguity_mode: AmbiguityMode,
    pub language_filter: Vec<Language>,
    /// Short names used when rendering slice text.
    pub alias_map: BTreeMap<String, String>,
}

impl Default for ToolConfig {
    fn default() -> Self {
        ToolConfig {
            extra_layouts: Vec::new(),
            move_similarity_threshold: DEFAULT_MOVE_THRESHOLD,
            ambiguity_mode: AmbiguityMode::Lenient,
            language_filter: vec![Language::Java, Language::Kotlin],
            alias_map: BTreeMap::new(),
        }
    }
}

impl ToolConfig {
    pub fn from_yaml(text: &str) -> Result<ToolConfig> {
        let config: ToolConfig = if text.trim().is_empty() {
            ToolConfig::default()
        } else {
            serde_yaml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<ToolConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        ToolConfig::from_yaml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.move_similarity_threshold;
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Config(format!(
                "move_similarity_threshold {t} is outside [0, 1]"
            )));
        }
        for p in &self.extra_layouts {
            validate_layout_pattern(p).map_err(Error::Config)?;
        }
        if self.language_filter.is_empty() {
            return Err(Error::Config("language_filter selects no language".into()));
        }
        Ok(())
    }

    pub fn accepts(&self, language: Language) -> bool {
        self.language_filter.contains(&language)
    }
}
