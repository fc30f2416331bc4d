//! Option values from a TOML file, applied below command-line flags.
//!
//! Values the user did not pass on the command line are appended to the
//! argument list as flags and the whole list is parsed again, so file
//! values go through the same validation as flags.

use std::ffi::OsString;
use std::path::Path;

use clap::parser::ValueSource;
use clap::{ArgAction, ArgMatches, Command};

use crate::error::{Error, Result};

/// Accepted keys: the long flag (`snr-step`, `detector`) or the field name
/// (`snr_step`, `detectors`), each with `-` or `_`.
fn key_variants(arg: &clap::Arg) -> Vec<String> {
    let mut keys = Vec::new();
    for name in arg.get_long().into_iter().chain([arg.get_id().as_str()]) {
        for k in [name.replace('_', "-"), name.replace('-', "_")] {
            if !keys.contains(&k) {
                keys.push(k);
            }
        }
    }
    keys
}

fn scalar(v: &toml::Value) -> Option<String> {
    match v {
        toml::Value::String(s) => Some(s.clone()),
        toml::Value::Integer(i) => Some(i.to_string()),
        toml::Value::Float(f) => Some(f.to_string()),
        toml::Value::Boolean(b) => Some(b.to_string()),
        _ => None,
    }
}

/// Flags to append for file values the command line left unset.
pub fn config_flags(
    path: &Path,
    root: &Command,
    matches: &ArgMatches,
) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let Some((name, sub_matches)) = matches.subcommand() else {
        return Ok(Vec::new());
    };
    let sub = root
        .find_subcommand(name)
        .expect("matched subcommand exists");
    let section = match table.get(name) {
        Some(toml::Value::Table(t)) => Some(t),
        Some(_) => return Err(Error::Config(format!("[{name}] in {} must be a table", path.display()))),
        None => None,
    };

    let mut args: Vec<(&clap::Arg, &ArgMatches)> = sub.get_arguments().map(|a| (a, sub_matches)).collect();
    for a in root.get_arguments() {
        if !args.iter().any(|(b, _)| b.get_id() == a.get_id()) {
            args.push((a, matches));
        }
    }
    if let Some(section) = section {
        for key in section.keys() {
            let known = args
                .iter()
                .filter(|(a, _)| a.get_long().is_some())
                .any(|(a, _)| key_variants(a).contains(key));
            if !known {
                return Err(Error::Config(format!(
                    "unknown option {key:?} in [{name}] of {}",
                    path.display()
                )));
            }
        }
    }

    let mut out = Vec::new();
    for (arg, source) in args {
        let Some(long) = arg.get_long() else { continue };
        if long == "config" {
            continue;
        }
        let id = arg.get_id().as_str();
        if source.value_source(id) == Some(ValueSource::CommandLine) {
            continue;
        }
        let keys = key_variants(arg);
        let value = section
            .and_then(|s| keys.iter().find_map(|k| s.get(k)))
            .or_else(|| keys.iter().find_map(|k| table.get(k).filter(|v| !v.is_table())));
        let Some(value) = value else { continue };
        let flag = OsString::from(format!("--{long}"));
        match arg.get_action() {
            ArgAction::SetTrue => match value {
                toml::Value::Boolean(true) => out.push(flag),
                toml::Value::Boolean(false) => {}
                _ => return Err(Error::Config(format!("{long} must be true or false"))),
            },
            _ => {
                let values: Vec<String> = match value {
                    toml::Value::Array(items) => items.iter().filter_map(scalar).collect(),
                    v => scalar(v).into_iter().collect(),
                };
                for v in values {
                    out.push(flag.clone());
                    out.push(OsString::from(v));
                }
            }
        }
    }
    Ok(out)
}
