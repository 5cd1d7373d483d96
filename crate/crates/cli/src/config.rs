//! `--config PATH` support: a flat `key=value` file whose keys are flag names
//! without the leading dashes. Its flags are spliced in right after the
//! subcommand, so anything given on the command line overrides them.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{usage, CliError};

/// Flags that take no value; `key=true` turns them on, `key=false` is dropped.
const SWITCHES: &[&str] = &["asymptotic"];

pub fn parse(text: &str, origin: &Path) -> Result<Vec<OsString>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(usage(format!("{}:{}: expected key=value", origin.display(), n + 1)));
        };
        let (key, value) = (key.trim().trim_start_matches('-'), value.trim());
        if key.is_empty() || key == "config" {
            return Err(usage(format!("{}:{}: invalid key '{key}'", origin.display(), n + 1)));
        }
        if SWITCHES.contains(&key) {
            match value {
                "true" => out.push(format!("--{key}").into()),
                "false" => {}
                _ => return Err(usage(format!("{}:{}: {key} must be true or false", origin.display(), n + 1))),
            }
        } else {
            out.push(format!("--{key}").into());
            out.push(value.into());
        }
    }
    Ok(out)
}

/// Removes `--config PATH` from argv and splices the file's flags after the
/// subcommand name.
pub fn expand(mut argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut path = None;
    let mut i = 1;
    while i < argv.len() {
        let arg = argv[i].to_string_lossy().into_owned();
        if arg == "--config" {
            if i + 1 >= argv.len() {
                return Err(usage("--config needs a path"));
            }
            path = Some(argv.remove(i + 1));
            argv.remove(i);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            path = Some(p.into());
            argv.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    let path = Path::new(&path);
    let flags = parse(&std::fs::read_to_string(path)?, path)?;
    // The subcommand is the first argument that is not a flag.
    let at = argv
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map_or(argv.len(), |p| p + 2);
    argv.splice(at..at, flags);
    Ok(argv)
}
