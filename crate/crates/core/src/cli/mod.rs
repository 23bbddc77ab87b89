//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data or model
//! errors. Every command that writes files also writes a run manifest
//! next to its main output.

mod args;
mod commands;
mod manifest;

use std::collections::HashSet;
use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser};

pub use args::*;
pub use manifest::{
    digest_input, digest_output, manifest_path, sha256_file, FileDigest, OutputDigest, RunManifest,
    MANIFEST_SCHEMA, MANIFEST_SCHEMA_ID, MANIFEST_SCHEMA_VERSION,
};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "HDRCLASS_THREADS";

/// A mistake in how the tool was invoked rather than in the data.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

pub(crate) fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut argv = Vec::new();
    for a in args {
        match a.into().into_string() {
            Ok(s) => argv.push(s),
            Err(bad) => {
                eprintln!("error: argument {bad:?} is not valid UTF-8");
                return 1;
            }
        }
    }
    init_threads();
    match run(argv) {
        Ok(()) => 0,
        Err(e) => report_error(&e),
    }
}

/// A usage error clap has already printed.
#[derive(Debug, thiserror::Error)]
#[error("invalid arguments")]
struct Silent;

fn report_error(e: &anyhow::Error) -> i32 {
    if e.downcast_ref::<Silent>().is_some() {
        return 1;
    }
    if let Some(u) = e.downcast_ref::<UsageError>() {
        eprintln!("error: {u}\n\nRun with --help for usage.");
        return 1;
    }
    eprintln!("error: {e}");
    for cause in e.chain().skip(1) {
        eprintln!("  caused by: {cause}");
    }
    2
}

pub(crate) fn run(argv: Vec<String>) -> anyhow::Result<()> {
    let argv = merge_config(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    Ok(())
                }
                _ => {
                    eprint!("{e}");
                    Err(Silent.into())
                }
            };
        }
    };
    commands::execute(cli.command, argv[1..].to_vec())
}

fn init_threads() {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return;
    };
    match v.trim().parse::<usize>() {
        Ok(n) if n >= 1 => {
            // fails only if a pool already exists, e.g. on a second dispatch
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        _ => eprintln!("warning: ignoring {THREADS_ENV}={v:?}; expected a positive integer"),
    }
}

/// Folds a `--config` file into the argument list.
///
/// Each `key = value` line supplies `--key value` unless the flag is
/// already on the command line. Keys may use `_` for `-`. Switches take
/// `true` or `false`. Keys the chosen subcommand does not know are
/// skipped with a warning. The returned list no longer mentions
/// `--config`.
pub fn merge_config(argv: Vec<String>) -> anyhow::Result<Vec<String>> {
    let mut config_path = None;
    let mut rest = Vec::with_capacity(argv.len());
    let mut it = argv.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            config_path = Some(it.next().ok_or_else(|| usage("--config needs a file"))?);
        } else if let Some(p) = a.strip_prefix("--config=") {
            config_path = Some(p.to_string());
        } else {
            rest.push(a);
        }
    }
    let Some(path) = config_path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|e| usage(format!("cannot read config file {path}: {e}")))?;
    let entries = parse_config(&text).map_err(|e| usage(format!("{path}: {e}")))?;

    let root = Cli::command();
    let Some(sub) = rest
        .iter()
        .skip(1)
        .find_map(|a| root.get_subcommands().find(|s| s.get_name() == a))
    else {
        // nothing to merge into; let the parser report the missing command
        return Ok(rest);
    };
    let given: HashSet<String> = rest
        .iter()
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect();
    let mut extra = Vec::new();
    for (key, value) in entries {
        let Some(arg) = sub.get_arguments().find(|a| a.get_long() == Some(key.as_str())) else {
            eprintln!("warning: config key {key:?} is not a flag of `{}`; ignored", sub.get_name());
            continue;
        };
        if given.contains(&key) {
            continue;
        }
        if arg.get_action().takes_values() {
            extra.push(format!("--{key}"));
            extra.push(value);
        } else {
            match value.as_str() {
                "true" => extra.push(format!("--{key}")),
                "false" => {}
                other => return Err(usage(format!("{path}: switch {key} takes true or false, got {other:?}"))),
            }
        }
    }
    rest.extend(extra);
    Ok(rest)
}

/// `key = value` pairs in file order; `#` starts a comment line.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", i + 1))?;
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        let v = v.trim();
        let v = v
            .strip_prefix('"')
            .and_then(|s| s.strip_suffix('"'))
            .unwrap_or(v);
        out.push((key, v.to_string()));
    }
    Ok(out)
}

pub(crate) fn ensure_parent(path: &Path) -> std::io::Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir),
        _ => Ok(()),
    }
}
