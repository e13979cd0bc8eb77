//! JSON experiment configuration loading with field-level errors.

use std::path::Path;

use loopid::ExperimentConfig;

use crate::CliError;

/// Reads, parses, and validates a JSON experiment configuration.
pub fn load_config(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        action: "read config",
        path: path.display().to_string(),
        source,
    })?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}
