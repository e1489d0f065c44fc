//! Plain `key = value` config files. Each key names a long flag of the subcommand;
//! the file's flags are inserted before the command-line ones, so the command line wins.

use std::ffi::OsString;

use clap::{ArgMatches, Command};

use crate::CliError;

/// Flags that never appear in a metadata echo.
const NOT_ECHOED: [&str; 2] = ["config", "workers"];

/// Parses config text into `(flag, value)` pairs. Blank lines and `#` comments are skipped;
/// keys may use `_` or `-`.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
        .map(|(i, line)| {
            let (key, value) =
                line.split_once('=').ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", i + 1)))?;
            let key = key.trim().replace('_', "-");
            if key.is_empty() {
                return Err(CliError::Config(format!("config line {}: empty key", i + 1)));
            }
            Ok((key, value.trim().to_string()))
        })
        .collect()
}

/// Replaces `--config <file>` by the file's flags, placed right after the subcommand name.
pub fn expand(argv: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut path = None;
    let mut iter = argv.into_iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            let value = iter.next().ok_or_else(|| CliError::Config("--config needs a file".into()))?;
            path = Some(value);
        } else if let Some(value) = text.strip_prefix("--config=") {
            path = Some(OsString::from(value));
        } else {
            rest.push(arg);
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.to_string_lossy())))?;
    let injected = parse(&text)?.into_iter().flat_map(|(k, v)| [OsString::from(format!("--{k}")), OsString::from(v)]);
    // argv[0] is the program, argv[1] the subcommand.
    let split = rest.len().min(2);
    let tail = rest.split_off(split);
    rest.extend(injected);
    rest.extend(tail);
    Ok(rest)
}

/// Every resolved long flag of a subcommand, defaults included, as `(flag, value)` pairs.
pub fn echo(command: &Command, matches: &ArgMatches) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = command
        .get_arguments()
        .filter_map(|arg| Some((arg.get_id().as_str(), arg.get_long()?)))
        .filter(|(_, long)| !NOT_ECHOED.contains(long))
        .filter_map(|(id, long)| {
            let values = matches.try_get_raw(id).ok()??;
            let joined = values.map(|v| v.to_string_lossy().into_owned()).collect::<Vec<_>>().join(",");
            Some((long.to_string(), joined))
        })
        .collect();
    out.sort();
    out
}
