use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::{ScenarioConfig, SCHEMA_VERSION};
use crate::error::{Error, Result};

/// Run-dependent facts kept apart from the deterministic payload.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metadata {
    pub tool_version: String,
    /// Start of the run, seconds since the Unix epoch.
    pub started_unix_s: f64,
    pub wall_time_s: f64,
    /// Per-item wall times (budget rows, sweep points) when relevant.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub item_wall_times_s: Vec<f64>,
}

impl Metadata {
    pub fn start() -> (Self, std::time::Instant) {
        let started = SystemTime::now().duration_since(UNIX_EPOCH).unwrap_or(Duration::ZERO).as_secs_f64();
        (
            Self { tool_version: env!("CARGO_PKG_VERSION").into(), started_unix_s: started, ..Default::default() },
            std::time::Instant::now(),
        )
    }
}

/// JSON report envelope shared by every command.
#[derive(Clone, Debug, Serialize)]
pub struct Report<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub config: Option<&'a ScenarioConfig>,
    pub results: &'a T,
    pub metadata: &'a Metadata,
}

pub fn report_json<T: Serialize>(command: &str, config: Option<&ScenarioConfig>, results: &T, metadata: &Metadata) -> String {
    let r = Report { schema_version: SCHEMA_VERSION, command, config, results, metadata };
    let mut s = serde_json::to_string_pretty(&r).expect("report serializes");
    s.push('\n');
    s
}

/// Full-precision scientific notation used in every CSV.
pub fn sci(x: f64) -> String {
    format!("{x:.16e}")
}

/// Quotes a text field when it contains separators or quotes.
pub fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// A named file produced by a command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

impl OutputFile {
    pub fn new(name: &str, contents: impl Into<Vec<u8>>) -> Self {
        Self { name: name.into(), contents: contents.into() }
    }
}

/// Writes files into `dir`, creating it if needed; returns their paths.
pub fn write_outputs(dir: &Path, files: &[OutputFile]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", dir.display()))))?;
    files
        .iter()
        .map(|f| {
            let p = dir.join(&f.name);
            std::fs::write(&p, &f.contents)?;
            Ok(p)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_helpers() {
        assert_eq!(csv_text("plain"), "plain");
        assert_eq!(csv_text("a, b"), "\"a, b\"");
        assert_eq!(csv_text("say \"x\""), "\"say \"\"x\"\"\"");
        let x = 0.1f64 + 0.2;
        assert_eq!(sci(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn envelope_carries_schema_version() {
        let (meta, _) = Metadata::start();
        let json = report_json("test", None, &vec![1.0, 2.0], &meta);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["results"][1], 2.0);
        assert!(v["metadata"]["started_unix_s"].as_f64().unwrap() > 0.0);
    }
}
