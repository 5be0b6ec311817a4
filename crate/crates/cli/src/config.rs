//! Config files and the errors the binary reports.
//!
//! A config file is a JSON object with an optional `schema_version` and one
//! section per subcommand, keyed by the subcommand name:
//!
//! ```json
//! { "schema_version": 1, "sample-forest": { "n": 1000, "m": 500, "seed": 7 } }
//! ```
//!
//! Flags given on the command line override the section.

use critforest::manifest::SCHEMA_VERSION;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Map, Value};
use std::path::Path;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file, or argument combination.
    Config(String),
    Lib(critforest::Error),
    Io(String),
    /// The command ran but a check it performs did not pass.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use critforest::Error as E;
        match self {
            CliError::Failed(_) => 1,
            CliError::Config(_) => 2,
            CliError::Lib(E::Domain(_) | E::Validation(_) | E::BoundUndefined { .. }) => 3,
            CliError::Lib(E::Budget { .. }) => 4,
            CliError::Lib(E::Accuracy { .. }) => 5,
            CliError::Lib(E::Capacity { .. }) => 6,
            CliError::Lib(E::Format(_) | E::Io(_)) | CliError::Io(_) => 7,
        }
    }

    pub fn kind(&self) -> &'static str {
        use critforest::Error as E;
        match self {
            CliError::Failed(_) => "failed",
            CliError::Config(_) => "config",
            CliError::Lib(E::Domain(_)) => "domain",
            CliError::Lib(E::Validation(_)) => "validation",
            CliError::Lib(E::BoundUndefined { .. }) => "bound-undefined",
            CliError::Lib(E::Budget { .. }) => "budget",
            CliError::Lib(E::Accuracy { .. }) => "accuracy",
            CliError::Lib(E::Capacity { .. }) => "capacity",
            CliError::Lib(E::Format(_)) => "format",
            CliError::Lib(E::Io(_)) | CliError::Io(_) => "io",
        }
    }

    pub fn to_json(&self) -> Value {
        let message = match self {
            CliError::Config(m) | CliError::Io(m) | CliError::Failed(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        };
        json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "kind": self.kind(), "exit_code": self.exit_code(), "message": message }
        })
    }
}

impl From<critforest::Error> for CliError {
    fn from(e: critforest::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

pub struct ConfigFile {
    root: Map<String, Value>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("config is not valid JSON: {e}")))?;
        let Value::Object(root) = value else {
            return config_err("config must be a JSON object");
        };
        match root.get("schema_version") {
            None => {}
            Some(v) if v.as_u64() == Some(u64::from(SCHEMA_VERSION)) => {}
            Some(v) => return config_err(format!("unsupported config schema_version {v}")),
        }
        Ok(Self { root })
    }

    fn section(&self, command: &str) -> CliResult<Map<String, Value>> {
        match self.root.get(command) {
            None => Ok(Map::new()),
            Some(Value::Object(m)) => Ok(m.clone()),
            Some(_) => config_err(format!("config section {command:?} must be an object")),
        }
    }
}

/// Overlay the flags that were actually given onto the config section.
/// Unset options and `false` switches count as not given.
pub fn resolve<T: Serialize + DeserializeOwned>(command: &str, flags: &T, file: Option<&ConfigFile>) -> CliResult<T> {
    let mut merged = match file {
        Some(f) => f.section(command)?,
        None => Map::new(),
    };
    let Value::Object(given) = serde_json::to_value(flags)? else {
        return config_err("flags did not serialise to an object");
    };
    for (k, v) in given {
        if !(v.is_null() || v == Value::Bool(false)) {
            merged.insert(k, v);
        }
    }
    serde_json::from_value(Value::Object(merged)).map_err(|e| CliError::Config(format!("{command}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, Debug, PartialEq)]
    #[serde(deny_unknown_fields)]
    struct Args {
        n: Option<usize>,
        seed: Option<u64>,
        #[serde(default)]
        flag: bool,
    }

    #[test]
    fn flags_win_over_file() {
        let f = ConfigFile::parse(r#"{"schema_version": 1, "x": {"n": 5, "seed": 9, "flag": true}}"#).unwrap();
        let got = resolve("x", &Args { n: Some(7), seed: None, flag: false }, Some(&f)).unwrap();
        assert_eq!(got, Args { n: Some(7), seed: Some(9), flag: true });
    }

    #[test]
    fn rejects_unknown_keys_and_versions() {
        let f = ConfigFile::parse(r#"{"x": {"bogus": 1}}"#).unwrap();
        assert!(matches!(resolve("x", &Args { n: None, seed: None, flag: false }, Some(&f)), Err(CliError::Config(_))));
        assert!(ConfigFile::parse(r#"{"schema_version": 2}"#).is_err());
        assert!(ConfigFile::parse("[1]").is_err());
    }
}
