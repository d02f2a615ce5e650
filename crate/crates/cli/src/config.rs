//! Flat key-value config files with per-subcommand sections.
//!
//! ```text
//! # applies to every subcommand
//! seed = 7
//!
//! [train]
//! hidden = 24,32
//! max-epochs = 50
//!
//! [sweep-noise]
//! repeats = 20
//! ```
//!
//! Keys are long flag names without the leading `--`. Values are passed
//! to the flag verbatim; boolean flags take `true`/`false`. Command-line
//! flags always win: a key the user already passed is skipped during
//! injection. Unknown sections and keys are rejected.

use std::path::Path;

use clap::Command;

use crate::util::AppError;

#[derive(Debug, PartialEq)]
struct ConfigEntry {
    section: Option<String>,
    key: String,
    value: String,
    line: usize,
}

fn parse_entries(text: &str) -> Result<Vec<ConfigEntry>, AppError> {
    let mut entries = Vec::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                AppError::Usage(format!("config line {}: unterminated section {raw:?}", i + 1))
            })?;
            section = Some(name.trim().to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            AppError::Usage(format!(
                "config line {}: expected `key = value`, got {raw:?}",
                i + 1
            ))
        })?;
        entries.push(ConfigEntry {
            section: section.clone(),
            key: key.trim().to_string(),
            value: value.trim().to_string(),
            line: i + 1,
        });
    }
    Ok(entries)
}

/// True if `flag` is a boolean switch (takes no value) on `cmd`.
fn is_switch(cmd: &Command, flag: &str) -> bool {
    cmd.get_arguments()
        .any(|a| a.get_long() == Some(flag) && matches!(a.get_action(), clap::ArgAction::SetTrue))
}

fn has_flag(cmd: &Command, flag: &str) -> bool {
    cmd.get_arguments().any(|a| a.get_long() == Some(flag))
}

/// True if the user already passed `--flag` (with either `--flag value`
/// or `--flag=value` spelling) in their own arguments.
fn user_passed(user_args: &[String], flag: &str) -> bool {
    let exact = format!("--{flag}");
    let prefixed = format!("--{flag}=");
    user_args
        .iter()
        .any(|a| *a == exact || a.starts_with(&prefixed))
}

/// Reads a config file and returns the extra argv tokens for
/// `subcommand`, validating every section and key along the way. Keys the
/// user passed themselves (in `user_args`) are skipped so command-line
/// flags override the file.
pub fn config_args(
    path: &Path,
    root: &Command,
    subcommand: &str,
    user_args: &[String],
) -> Result<Vec<String>, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let entries = parse_entries(&text)?;

    let target = root.find_subcommand(subcommand).ok_or_else(|| {
        AppError::Usage(format!("config applies to unknown subcommand {subcommand:?}"))
    })?;

    let mut args = Vec::new();
    for entry in &entries {
        // Every key is validated against its own section's subcommand so
        // typos fail fast even in sections not used by this run.
        let owner = match &entry.section {
            Some(name) => root.find_subcommand(name).ok_or_else(|| {
                AppError::Usage(format!(
                    "config line {}: unknown section [{name}]",
                    entry.line
                ))
            })?,
            None => target,
        };
        if !has_flag(owner, &entry.key) {
            return Err(AppError::Usage(format!(
                "config line {}: unknown key {:?} for subcommand {:?}",
                entry.line,
                entry.key,
                owner.get_name()
            )));
        }
        let applies = match &entry.section {
            Some(name) => name == subcommand,
            None => true,
        };
        if !applies || user_passed(user_args, &entry.key) {
            continue;
        }
        if is_switch(target, &entry.key) {
            match entry.value.as_str() {
                "true" => args.push(format!("--{}", entry.key)),
                "false" => {}
                other => {
                    return Err(AppError::Usage(format!(
                        "config line {}: switch {:?} takes true/false, got {other:?}",
                        entry.line, entry.key
                    )));
                }
            }
        } else {
            args.push(format!("--{}", entry.key));
            args.push(entry.value.clone());
        }
    }
    Ok(args)
}

/// Locates `--config <path>` (or `--config=<path>`) ahead of clap
/// parsing, so config-derived flags can be injected into the argv.
pub fn find_config_flag(argv: &[String]) -> Option<String> {
    let mut iter = argv.iter();
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            return iter.next().cloned();
        }
        if let Some(value) = arg.strip_prefix("--config=") {
            return Some(value.to_string());
        }
    }
    None
}

/// Splices config-derived args right after the subcommand token, leaving
/// user-provided flags later in the argv so they override.
pub fn inject_config_args(argv: &[String], extra: Vec<String>) -> Vec<String> {
    if extra.is_empty() || argv.len() < 2 {
        return argv.to_vec();
    }
    let mut out = Vec::with_capacity(argv.len() + extra.len());
    out.extend_from_slice(&argv[..2]);
    out.extend(extra);
    out.extend_from_slice(&argv[2..]);
    out
}
