use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::error::Category;

use crate::error::Error;
use crate::estimators::EstimatorSettings;
use crate::sim::Scenario;

/// Acceptance rule `|value − target| ≤ max(se_multiplier·SE, abs_floor)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub se_multiplier: f64,
    pub abs_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            se_multiplier: 3.0,
            abs_floor: 1e-3,
        }
    }
}

/// A complete experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    pub scenario: Scenario,
    #[serde(default = "default_replicas")]
    pub replicas: u64,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    #[serde(default = "default_burn_in")]
    pub burn_in_fraction: f64,
    #[serde(default = "default_num_batches")]
    pub num_batches: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_replicas() -> u64 {
    1
}

pub fn default_alpha_grid() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 1.0, 2.0]
}

fn default_burn_in() -> f64 {
    0.1
}

fn default_num_batches() -> usize {
    20
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl RunConfig {
    pub fn new(name: impl Into<String>, scenario: Scenario, replicas: u64) -> Self {
        Self {
            name: name.into(),
            scenario,
            replicas,
            alpha_grid: default_alpha_grid(),
            burn_in_fraction: default_burn_in(),
            num_batches: default_num_batches(),
            tolerances: Tolerances::default(),
            output_dir: default_output_dir(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn estimator_settings(&self) -> EstimatorSettings {
        EstimatorSettings {
            burn_in_fraction: self.burn_in_fraction,
            num_batches: self.num_batches,
            ..EstimatorSettings::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.scenario.validate("scenario")?;
        if !(self.scenario.horizon > 0.0) {
            return Err(ConfigError::invalid("scenario.horizon", "must be > 0"));
        }
        if self.replicas < 1 {
            return Err(ConfigError::invalid("replicas", "must be ≥ 1"));
        }
        if self.alpha_grid.first() != Some(&0.0) {
            return Err(ConfigError::invalid("alpha_grid", "must start at 0"));
        }
        crate::estimators::check_alphas(&self.alpha_grid).map_err(|e| rebase(e, "alpha_grid", "alphas"))?;
        self.estimator_settings().validate("estimators").map_err(|e| rebase(e, "", "estimators."))?;
        let t = &self.tolerances;
        if !(t.se_multiplier.is_finite() && t.se_multiplier > 0.0) {
            return Err(ConfigError::invalid("tolerances.se_multiplier", "must be > 0"));
        }
        if !(t.abs_floor.is_finite() && t.abs_floor >= 0.0) {
            return Err(ConfigError::invalid("tolerances.abs_floor", "must be ≥ 0"));
        }
        Ok(())
    }
}

fn rebase(e: Error, to: &str, from: &str) -> ConfigError {
    match e {
        Error::InvalidParameter { field, rule } => ConfigError::Invalid {
            path: field.replacen(from, to, 1),
            rule,
        },
        other => other.into(),
    }
}

/// Configuration failure. Each variant has a stable code.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("[E_SYNTAX] line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("[E_UNKNOWN_FIELD] {path}: {message}")]
    UnknownField { path: String, message: String },
    #[error("[E_MISSING_FIELD] {path}: {message}")]
    MissingField { path: String, message: String },
    #[error("[E_TYPE] {path}: {message}")]
    Type { path: String, message: String },
    #[error("[E_INVALID] {path}: {rule}")]
    Invalid { path: String, rule: String },
    #[error("[E_STABILITY] {0}")]
    Stability(String),
}

impl ConfigError {
    pub fn invalid(path: impl Into<String>, rule: impl Into<String>) -> Self {
        ConfigError::Invalid {
            path: path.into(),
            rule: rule.into(),
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Syntax { .. } => "E_SYNTAX",
            ConfigError::UnknownField { .. } => "E_UNKNOWN_FIELD",
            ConfigError::MissingField { .. } => "E_MISSING_FIELD",
            ConfigError::Type { .. } => "E_TYPE",
            ConfigError::Invalid { .. } => "E_INVALID",
            ConfigError::Stability(_) => "E_STABILITY",
        }
    }
}

impl From<Error> for ConfigError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { field, rule } => ConfigError::Invalid { path: field, rule },
            Error::Unstable(msg) => ConfigError::Stability(msg),
            other => ConfigError::Invalid {
                path: String::new(),
                rule: other.to_string(),
            },
        }
    }
}

/// Parses and validates a JSON run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        classify(path, e.into_inner())
    })?;
    de.end().map_err(|e| classify(String::new(), e))?;
    config.validate()?;
    Ok(config)
}

fn classify(path: String, e: serde_json::Error) -> ConfigError {
    let message = strip_position(&e.to_string());
    match e.classify() {
        Category::Syntax | Category::Eof | Category::Io => ConfigError::Syntax {
            line: e.line(),
            column: e.column(),
            message,
        },
        Category::Data if message.starts_with("unknown field") || message.starts_with("unknown variant") => {
            ConfigError::UnknownField { path, message }
        }
        Category::Data if message.starts_with("missing field") => ConfigError::MissingField { path, message },
        Category::Data => ConfigError::Type { path, message },
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}
