//! `run <config.toml>`: a subcommand and its flags stored in a file.
//!
//! ```toml
//! command = "table1"
//!
//! [args]
//! delta = 1.5
//! h = [0.6, 5.0, 20.0]
//! L = "6:24:2"
//! format = "json"
//! ```
//!
//! Each key becomes `--key value`. Numeric arrays are joined with commas,
//! string arrays repeat the flag, and `true` adds a bare flag.

use std::path::Path;

use crate::error::CliError;

fn scalar(v: &toml::Value, key: &str) -> Result<String, CliError> {
    match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(x) => Ok(x.to_string()),
        _ => Err(CliError::Usage(format!("unsupported value for `{key}`"))),
    }
}

/// Translates the file into an argument vector starting with the program name.
pub fn config_to_argv(text: &str) -> Result<Vec<String>, CliError> {
    let doc: toml::Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("invalid TOML: {e}")))?;
    let command = doc
        .get("command")
        .and_then(|v| v.as_str())
        .ok_or_else(|| CliError::Usage("config needs `command = \"...\"`".into()))?;
    if command == "run" {
        return Err(CliError::Usage("a config cannot run another config".into()));
    }
    if let Some(extra) = doc.keys().find(|k| *k != "command" && *k != "args") {
        return Err(CliError::Usage(format!("unknown top-level key `{extra}`")));
    }
    let mut argv = vec!["kinkchain".to_string(), command.to_string()];
    let empty = toml::Table::new();
    let args = match doc.get("args") {
        Some(toml::Value::Table(t)) => t,
        Some(_) => return Err(CliError::Usage("`args` must be a table".into())),
        None => &empty,
    };
    for (key, value) in args {
        let flag = format!("--{key}");
        match value {
            toml::Value::Boolean(true) => argv.push(flag),
            toml::Value::Boolean(false) => {}
            toml::Value::Array(items) if items.iter().all(|i| i.is_str()) => {
                for item in items {
                    argv.push(flag.clone());
                    argv.push(scalar(item, key)?);
                }
            }
            toml::Value::Array(items) => {
                let parts = items
                    .iter()
                    .map(|i| scalar(i, key))
                    .collect::<Result<Vec<_>, _>>()?;
                argv.push(flag);
                argv.push(parts.join(","));
            }
            other => {
                argv.push(flag);
                argv.push(scalar(other, key)?);
            }
        }
    }
    Ok(argv)
}

pub fn load(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    config_to_argv(&text)
}
