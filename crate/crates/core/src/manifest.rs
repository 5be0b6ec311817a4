//! Provenance block embedded in every output artifact.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub tool: String,
    pub code_version: String,
    pub command: String,
    pub seed: Option<u64>,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub config: serde_json::Value,
}

impl Manifest {
    pub fn new<C: Serialize>(command: &str, config: &C, seed: Option<u64>) -> Self {
        let config = serde_json::to_value(config).unwrap_or(serde_json::Value::Null);
        Self {
            schema_version: SCHEMA_VERSION,
            tool: env!("CARGO_PKG_NAME").to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            config_hash: config_hash(&config),
            config,
        }
    }

    /// `# key: value` lines for CSV headers.
    pub fn csv_comment(&self) -> String {
        let config = serde_json::to_string(&self.config).unwrap_or_default();
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# schema_version: {}\n# tool: {} {}\n# command: {}\n# seed: {}\n# config_hash: {}\n# config: {}\n",
            self.schema_version, self.tool, self.code_version, self.command, seed, self.config_hash, config
        )
    }
}

/// Hex SHA-256 of `value` serialised with sorted keys.
pub fn config_hash(value: &serde_json::Value) -> String {
    // serde_json's default map is a BTreeMap, so keys come out sorted
    let text = serde_json::to_string(value).unwrap_or_default();
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}
