//! `key=value` configuration files merged into the command line.
//!
//! File entries become `--key=value` arguments inserted before the flags given
//! on the command line, so explicit flags override the file (clap keeps the
//! last occurrence). A `command=<name>` entry supplies the subcommand when the
//! command line has none; `tool` and `version` entries are informational.
//!
//! A CSV file written by this tool is itself a valid configuration: when the
//! first line is `# tool=hypball`, the leading `# key=value` header lines are
//! read and everything else is ignored, so an output file re-runs the exact
//! configuration that produced it.

use std::fs;

use crate::error::CliError;

/// Keys that are accepted in a file but never turned into flags.
const INFORMATIONAL_KEYS: [&str; 2] = ["tool", "version"];

/// Parsed `key=value` entries, in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub command: Option<String>,
    pub entries: Vec<(String, String)>,
}

/// First line of every CSV header block.
pub const HEADER_MARKER: &str = "# tool=hypball";

/// Parses `key=value` lines; blank lines and lines starting with `#` are
/// ignored. Output-file headers are recognized by [`HEADER_MARKER`].
pub fn parse_config(text: &str) -> Result<ConfigFile, CliError> {
    if text.lines().next().map(str::trim_end) == Some(HEADER_MARKER) {
        let header: Vec<&str> = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .filter_map(|l| l.strip_prefix("# "))
            .filter(|l| !l.starts_with("summary "))
            .collect();
        return parse_config(&header.join("\n"));
    }
    let mut out = ConfigFile::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Usage(format!(
                "config line {}: expected key=value, got '{line}'",
                lineno + 1
            )));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", lineno + 1)));
        }
        if key == "command" {
            out.command = Some(value.to_string());
        } else if !INFORMATIONAL_KEYS.contains(&key) {
            out.entries.push((key.to_string(), value.to_string()));
        }
    }
    Ok(out)
}

/// Removes `--config <path>` / `--config=<path>` from `args` and merges the
/// file's entries in front of the remaining flags.
pub fn expand_args(args: Vec<String>, subcommands: &[&str]) -> Result<Vec<String>, CliError> {
    let mut rest = Vec::with_capacity(args.len());
    let mut path = None;
    let mut iter = args.into_iter();
    if let Some(program) = iter.next() {
        rest.push(program);
    }
    while let Some(arg) = iter.next() {
        if arg == "--config" {
            path = Some(
                iter.next()
                    .ok_or_else(|| CliError::Usage("--config needs a file path".into()))?,
            );
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config file '{path}': {e}")))?;
    let file = parse_config(&text)?;
    let position = rest.iter().position(|a| subcommands.contains(&a.as_str()));
    let insert_at = match (position, &file.command) {
        (Some(p), _) => p + 1,
        (None, Some(cmd)) => {
            rest.insert(1, cmd.clone());
            2
        }
        (None, None) => {
            return Err(CliError::Usage(
                "no subcommand given on the command line or in the config file".into(),
            ))
        }
    };
    let flags: Vec<String> = file.entries.iter().map(|(k, v)| format!("--{k}={v}")).collect();
    rest.splice(insert_at..insert_at, flags);
    Ok(rest)
}
