//! Configuration, orchestration and result files for the `qmirror` tool.

mod config;
mod explain;
mod output;
mod run;

use std::path::Path;

use thiserror::Error;

pub use config::{
    load_config, parse_config, ExperimentConfig, ExperimentKind, MediumSection, MonteCarloSection, OutputFormat,
    OutputSection, SlitSection, SourceSection, Sweep, SweepSection,
};
pub use explain::explain;
pub use output::{write_outputs, Artifact, Check, RunReport};
pub use run::{execute, run_experiment};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid configuration key `{key}`: {message}{}", suggestion.as_ref().map(|s| format!(" (did you mean `{s}`?)")).unwrap_or_default())]
    Validation { key: String, message: String, suggestion: Option<String> },
    #[error("{context}: {message}")]
    Experiment { context: String, message: String },
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.display().to_string(), source }
    }

    pub fn validation(key: &str, message: impl Into<String>) -> Self {
        Self::Validation { key: key.to_string(), message: message.into(), suggestion: None }
    }

    pub fn experiment(context: &str, err: impl std::fmt::Display) -> Self {
        Self::Experiment { context: context.to_string(), message: err.to_string() }
    }

    /// Turns unknown-key and unknown-variant errors into validation errors
    /// carrying the closest accepted name.
    fn from_toml(err: &toml::de::Error) -> Self {
        let msg = err.message();
        for marker in ["unknown field `", "unknown variant `"] {
            let Some(start) = msg.find(marker) else { continue };
            let rest = &msg[start + marker.len()..];
            let Some(end) = rest.find('`') else { continue };
            let key = &rest[..end];
            let expected: Vec<&str> = rest[end + 1..].split('`').skip(1).step_by(2).collect();
            let suggestion = expected
                .iter()
                .map(|c| (strsim::levenshtein(key, c), *c))
                .filter(|(d, c)| *d <= 2.max(c.len() / 3))
                .min()
                .map(|(_, c)| c.to_string());
            return Self::Validation { key: key.to_string(), message: msg.trim().to_string(), suggestion };
        }
        Self::Parse(err.to_string())
    }
}
