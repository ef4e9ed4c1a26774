use std::path::Path;

use ep_lab_core::ScenarioConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Written next to every set of outputs. Feeding it back through `--config`
/// reproduces the CSV byte for byte; the timestamp is the only field that
/// changes between reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<ScenarioConfig>,
    /// Command-specific inputs not captured by the scenario (resonances, ranges, unknowns).
    #[serde(default)]
    pub parameters: serde_json::Value,
    /// File names relative to the output directory.
    pub outputs: Vec<String>,
    pub version: String,
    pub timestamp: String,
}

impl RunManifest {
    pub fn new(command: &str, config: Option<ScenarioConfig>, parameters: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            config,
            parameters,
            outputs: Vec::new(),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// Reads a scenario from a plain config file or from a manifest's `config` key.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: invalid JSON: {e}", path.display())))?;
    let value = match value.get("config") {
        Some(serde_json::Value::Null) => {
            return Err(CliError::Usage(format!("{}: manifest carries no scenario", path.display())))
        }
        Some(inner) => inner.clone(),
        None => value,
    };
    let cfg: ScenarioConfig = serde_json::from_value(value)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    cfg.validate()?;
    Ok(cfg)
}
