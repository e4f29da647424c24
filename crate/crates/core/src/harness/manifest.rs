//! Run manifest: ordered `key=value` lines.
//!
//! Keys are dotted paths. `file.*` entries hold paths relative to the
//! manifest's directory, `error.<noise>.<component>` the percent errors and
//! `time.*` wall-clock durations in milliseconds.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Result, VltError};

pub const MANIFEST_FILE: &str = "manifest.txt";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunManifest {
    entries: Vec<(String, String)>,
}

impl RunManifest {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `key`, replacing an earlier value in place.
    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Entries whose key starts with `prefix`.
    pub fn with_prefix<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = (&'a str, &'a str)> + 'a {
        self.entries
            .iter()
            .filter(move |(k, _)| k.starts_with(prefix))
            .map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Percent error recorded for a noise level and component.
    pub fn error(&self, noise: f64, component: &str) -> Option<f64> {
        self.get(&error_key(noise, component))?.parse().ok()
    }

    /// The manifest without `time.*` entries.
    pub fn without_timings(&self) -> RunManifest {
        RunManifest {
            entries: self.entries.iter().filter(|(k, _)| !k.starts_with("time.")).cloned().collect(),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.render()).map_err(|e| VltError::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<RunManifest> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| VltError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, origin: &Path) -> Result<RunManifest> {
        let mut m = RunManifest::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| VltError::Parse {
                path: origin.to_path_buf(),
                line: ln + 1,
                column: 1,
                message: "expected key=value".into(),
            })?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }
}

/// Label of a noise level in keys and file names, e.g. `noise5` or `noise2.5`.
pub fn noise_label(percent: f64) -> String {
    format!("noise{percent}")
}

pub fn error_key(noise: f64, component: &str) -> String {
    format!("error.{}.{component}", noise_label(noise))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_roundtrip() {
        let mut m = RunManifest::new();
        m.set("method", "ltm");
        m.set(error_key(0.0, "f11"), 8.5);
        m.set("time.total_ms", 12);
        m.set("method", "ll1m");
        assert_eq!(m.entries().len(), 3);
        assert_eq!(m.get("method"), Some("ll1m"));
        assert_eq!(m.error(0.0, "f11"), Some(8.5));
        let back = RunManifest::parse(&m.render(), Path::new("m")).unwrap();
        assert_eq!(back, m);
        assert_eq!(m.without_timings().entries().len(), 2);
    }

    #[test]
    fn rejects_lines_without_equals() {
        let err = RunManifest::parse("a=1\nbroken\n", Path::new("m")).unwrap_err();
        assert!(matches!(err, VltError::Parse { line: 2, .. }));
    }
}
