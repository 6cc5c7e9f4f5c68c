use std::fmt;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Failures the process reports through its exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable input; exit code 2.
    Usage(String),
    Core(locdec::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<locdec::Error> for CliError {
    fn from(e: locdec::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Everything a command produces. `pass` is `None` for commands that make
/// no claim.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub config: Value,
    pub config_hash: String,
    pub tool_version: String,
    pub result: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
    pub wall_clock_ms: u128,
}

pub struct Outcome {
    pub result: Value,
    pub pass: Option<bool>,
}

impl Outcome {
    pub fn info(result: impl Serialize) -> CliResult<Self> {
        Ok(Outcome { result: serde_json::to_value(result)?, pass: None })
    }

    pub fn claim(result: impl Serialize, pass: bool) -> CliResult<Self> {
        Ok(Outcome { result: serde_json::to_value(result)?, pass: Some(pass) })
    }
}

pub fn config_hash(config: &Value) -> String {
    let bytes = serde_json::to_vec(config).expect("json value serializes");
    hex::encode(&Sha256::digest(&bytes)[..8])
}

impl Report {
    pub fn new(command: &str, config: Value, started: Instant, outcome: Outcome) -> Self {
        Report {
            command: command.to_string(),
            config_hash: config_hash(&config),
            config,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            result: outcome.result,
            pass: outcome.pass,
            wall_clock_ms: started.elapsed().as_millis(),
        }
    }

    pub fn emit(&self, path: Option<&Path>) -> CliResult<()> {
        let text = serde_json::to_string_pretty(self)?;
        match path {
            Some(p) => std::fs::write(p, text + "\n")?,
            None => {
                let mut out = std::io::stdout().lock();
                match writeln!(out, "{text}") {
                    Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                    _ => {}
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn hash_depends_on_config_only() {
        let a = config_hash(&json!({"seed": 1, "r": 2}));
        assert_eq!(a, config_hash(&json!({"seed": 1, "r": 2})));
        assert_ne!(a, config_hash(&json!({"seed": 2, "r": 2})));
        assert_eq!(a.len(), 16);
    }
}
