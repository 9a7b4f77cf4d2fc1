//! Run manifests and the argument plumbing that makes them replayable.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

/// Everything needed to reproduce a run.
///
/// `argv` holds the arguments after config merging, minus the flags that only
/// choose where and how fast the run happens (`--out-dir`, `--workers`,
/// `--config`). Replaying it into another directory with any worker count
/// yields the same bytes, this manifest included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub params: Value,
    pub seed: u64,
    pub tool_version: String,
    pub schema_version: u32,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))
    }
}

const SESSION_FLAGS: [&str; 3] = ["--out-dir", "--workers", "--config"];

fn session_flag(token: &str) -> Option<bool> {
    SESSION_FLAGS.iter().find_map(|f| {
        if token == *f {
            Some(true)
        } else if token.strip_prefix(f).is_some_and(|rest| rest.starts_with('=')) {
            Some(false)
        } else {
            None
        }
    })
}

/// Drops session-only flags (and their values) from an argument list.
pub fn strip_session_flags(args: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(args.len());
    let mut iter = args.iter();
    while let Some(tok) = iter.next() {
        match session_flag(tok) {
            Some(true) => {
                iter.next();
            }
            Some(false) => {}
            None => out.push(tok.clone()),
        }
    }
    out
}

/// Value of `--config` in a raw argument list.
pub fn config_path(args: &[String]) -> Option<String> {
    let mut iter = args.iter();
    while let Some(tok) = iter.next() {
        if tok == "--config" {
            return iter.next().cloned();
        }
        if let Some(v) = tok.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn mentions(args: &[String], flag: &str) -> bool {
    args.iter()
        .any(|t| t == flag || t.strip_prefix(flag).is_some_and(|rest| rest.starts_with('=')))
}

fn scalar(value: &Value) -> Option<String> {
    match value {
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Appends the flags of a JSON config object that `args` does not already set.
pub fn merge_config(args: &[String], config: &Value) -> CliResult<Vec<String>> {
    let Value::Object(map) = config else {
        return Err(CliError::BadInput("config file must hold a JSON object".into()));
    };
    let mut merged = args.to_vec();
    for (key, value) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        if flag == "--config" || mentions(args, &flag) {
            continue;
        }
        let rendered = match value {
            Value::Bool(true) => {
                merged.push(flag);
                continue;
            }
            Value::Bool(false) | Value::Null => continue,
            Value::Array(items) => items
                .iter()
                .map(scalar)
                .collect::<Option<Vec<_>>>()
                .map(|v| v.join(",")),
            other => scalar(other),
        };
        let rendered = rendered.ok_or_else(|| CliError::BadInput(format!("config key {key:?} has an unsupported value")))?;
        merged.push(format!("{flag}={rendered}"));
    }
    Ok(merged)
}
