//! `--config <file>`: a flat `key=value` file whose entries become flags.
//!
//! Keys are flag names without the leading dashes; `command` names the
//! subcommand. `true` turns on a switch and `false` leaves it off. Flags on
//! the command line take precedence over the file.

use std::ffi::OsString;
use std::fs;

fn flag_name(arg: &OsString) -> Option<String> {
    let s = arg.to_str()?;
    let body = s.strip_prefix("--")?;
    Some(body.split('=').next().unwrap_or(body).to_string())
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key=value, got {line:?}", k + 1))?;
        let key = key.trim().trim_start_matches("--");
        if key.is_empty() {
            return Err(format!("config line {}: empty key", k + 1));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}

/// Returns `args` with the config file's entries spliced in after the
/// subcommand, which is the first argument naming one of `subcommands`.
pub fn expand(args: Vec<OsString>, subcommands: &[String]) -> Result<Vec<OsString>, String> {
    let mut path = None;
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    rest.extend(it.next());
    while let Some(a) = it.next() {
        match a.to_str() {
            Some("--config") => path = Some(it.next().ok_or("--config needs a file")?),
            Some(s) if s.starts_with("--config=") => path = Some(OsString::from(&s["--config=".len()..])),
            _ => rest.push(a),
        }
    }
    let Some(path) = path else {
        return Ok(rest);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {}: {e}", path.to_string_lossy()))?;
    let entries = parse(&text)?;

    let given: Vec<String> = rest.iter().filter_map(flag_name).collect();
    let mut sub_at = rest.iter().position(|a| a.to_str().is_some_and(|s| subcommands.iter().any(|c| c == s)));
    let mut extra = Vec::new();
    for (key, value) in entries {
        if key == "command" {
            if sub_at.is_none() {
                rest.insert(1, OsString::from(value));
                sub_at = Some(1);
            }
            continue;
        }
        if given.contains(&key) {
            continue;
        }
        match value.as_str() {
            "true" => extra.push(OsString::from(format!("--{key}"))),
            "false" => {}
            _ => {
                extra.push(OsString::from(format!("--{key}")));
                extra.push(OsString::from(value));
            }
        }
    }
    let at = sub_at.ok_or("no subcommand given on the command line or in the config")? + 1;
    rest.splice(at..at, extra);
    Ok(rest)
}
