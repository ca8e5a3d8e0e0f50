use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};
use split_ensemble::{Error, Result};

/// Calendar date and time (UTC) of `secs` seconds after the Unix epoch.
pub fn utc_parts(secs: u64) -> (i64, u32, u32, u32, u32, u32) {
    let days = (secs / 86_400) as i64;
    let rem = secs % 86_400;
    // days-to-civil, proleptic Gregorian calendar
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z.rem_euclid(146_097);
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let day = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let month = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    let year = yoe + era * 400 + i64::from(month <= 2);
    (year, month, day, (rem / 3600) as u32, (rem % 3600 / 60) as u32, (rem % 60) as u32)
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn iso_utc(secs: u64) -> String {
    let (y, mo, d, h, mi, s) = utc_parts(secs);
    format!("{y:04}-{mo:02}-{d:02}T{h:02}:{mi:02}:{s:02}Z")
}

fn compact_utc(secs: u64) -> String {
    let (y, mo, d, h, mi, s) = utc_parts(secs);
    format!("{y:04}{mo:02}{d:02}T{h:02}{mi:02}{s:02}Z")
}

/// Output directory of one command invocation, plus its manifest.
pub struct RunDir {
    pub path: PathBuf,
    manifest: serde_json::Map<String, Value>,
    outputs: Vec<String>,
}

impl RunDir {
    /// Creates `<root>/<command>-<timestamp>`, adding a suffix if it exists.
    pub fn create(root: &Path, command: &str) -> Result<Self> {
        let started = now_secs();
        let stem = format!("{command}-{}", compact_utc(started));
        std::fs::create_dir_all(root).map_err(|e| io_err(root, e))?;
        let mut path = root.join(&stem);
        let mut n = 1;
        loop {
            match std::fs::create_dir(&path) {
                Ok(()) => break,
                Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                    n += 1;
                    path = root.join(format!("{stem}-{n}"));
                }
                Err(e) => return Err(io_err(&path, e)),
            }
        }
        let mut manifest = serde_json::Map::new();
        manifest.insert("tool".into(), json!(env!("CARGO_PKG_NAME")));
        manifest.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        manifest.insert("command".into(), json!(command));
        manifest.insert("argv".into(), json!(std::env::args().collect::<Vec<_>>()));
        manifest.insert("started_utc".into(), json!(iso_utc(started)));
        Ok(RunDir {
            path,
            manifest,
            outputs: Vec::new(),
        })
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.manifest.insert(key.into(), v);
    }

    /// Path of a new output file, recorded in the manifest.
    pub fn file(&mut self, rel: &str) -> Result<PathBuf> {
        let p = self.path.join(rel);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io_err(parent, e))?;
        }
        self.outputs.push(rel.to_string());
        Ok(p)
    }

    pub fn write_json(&mut self, rel: &str, value: &impl Serialize) -> Result<PathBuf> {
        let p = self.file(rel)?;
        write_json(&p, value)?;
        Ok(p)
    }

    /// Writes `manifest.json` with the final status.
    pub fn finish(mut self, outcome: &Result<()>) -> Result<PathBuf> {
        self.manifest.insert("finished_utc".into(), json!(iso_utc(now_secs())));
        match outcome {
            Ok(()) => {
                self.manifest.insert("status".into(), json!("ok"));
                self.manifest.insert("exit_code".into(), json!(0));
            }
            Err(e) => {
                self.manifest.insert("status".into(), json!("error"));
                self.manifest.insert("error".into(), json!(e.to_string()));
                self.manifest.insert("exit_code".into(), json!(e.class().exit_code()));
            }
        }
        self.manifest.insert("outputs".into(), json!(self.outputs));
        let p = self.path.join("manifest.json");
        write_json(&p, &Value::Object(self.manifest))?;
        Ok(self.path)
    }
}

pub fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}
