//! Artifact emission: CSV tables, JSON reports, field snapshots, and the
//! run manifest with content hashes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fpplab_core::lattice::{Axis, PassageField, Site};
use fpplab_core::oriented::{LevelTable, ESCAPES};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

/// Collects the files written by one experiment run.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<PathBuf>,
}

impl Artifacts {
    pub fn new() -> Self {
        Artifacts::default()
    }

    pub fn record(&mut self, path: PathBuf) {
        self.files.push(path);
    }

    pub fn write_text(&mut self, dir: &Path, name: &str, text: &str) -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        self.record(path);
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, dir: &Path, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_text(dir, name, &text)
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    let mut s = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

#[derive(Debug, Serialize)]
struct ManifestFile {
    name: String,
    sha256: String,
    bytes: u64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    config: &'a ExperimentConfig,
    config_sha256: String,
    summary: &'a serde_json::Value,
    /// Outcome of the experiment's acceptance checks; null when the
    /// experiment defines none.
    pass: Option<bool>,
    files: Vec<ManifestFile>,
}

/// Writes `manifest.json`: the echoed config with its hash, the summary
/// statistics, the check outcome, and a content hash per emitted file.
pub fn write_manifest(
    dir: &Path,
    experiment: &str,
    cfg: &ExperimentConfig,
    summary: &serde_json::Value,
    pass: Option<bool>,
    artifacts: &Artifacts,
) -> Result<PathBuf> {
    let config_sha256 = sha256_hex(serde_json::to_string(cfg)?.as_bytes());
    let mut files = Vec::new();
    for path in artifacts.files() {
        let data = fs::read(path)?;
        files.push(ManifestFile {
            name: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default(),
            sha256: sha256_hex(&data),
            bytes: data.len() as u64,
        });
    }
    files.sort_by(|a, b| a.name.cmp(&b.name));
    let manifest = Manifest { experiment, config: cfg, config_sha256, summary, pass, files };
    let path = dir.join("manifest.json");
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Field snapshot: one `x t w_right w_up u` line per site (row-major), with
/// `nan` for the edges that would leave the window.
pub fn field_snapshot(field: &PassageField) -> String {
    let w = field.window();
    let mut out = String::with_capacity(w.len() * 24);
    for s in w.sites() {
        let wr = field.weight(s, Axis::Right).map(|v| v.to_string());
        let wu = field.weight(s, Axis::Up).map(|v| v.to_string());
        let u = field.uniform(s).unwrap();
        out.push_str(&format!(
            "{} {} {} {} {}\n",
            s.x,
            s.t,
            wr.unwrap_or_else(|_| "nan".into()),
            wu.unwrap_or_else(|_| "nan".into()),
            u
        ));
    }
    out
}

/// Header accompanying a field snapshot.
#[derive(Debug, Serialize)]
pub struct FieldHeader<'a> {
    pub x_min: i32,
    pub x_max: i32,
    pub t_min: i32,
    pub t_max: i32,
    pub p: f64,
    pub excess: &'a crate::config::ExcessSpec,
    pub seed: u64,
}

/// Level tables in the same line-oriented format, `x t l_fwd l_anti` with
/// `inf` for the escape sentinel.
pub fn levels_snapshot(fwd: &LevelTable, anti: &LevelTable) -> String {
    let w = fwd.window();
    let fmt = |v: u32| {
        if v == ESCAPES {
            "inf".to_string()
        } else {
            v.to_string()
        }
    };
    let mut out = String::with_capacity(w.len() * 16);
    for s in w.sites() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            s.x,
            s.t,
            fmt(fwd.level(s).unwrap()),
            fmt(anti.level(s).unwrap())
        ));
    }
    out
}

/// Streaming CSV writer that lands in the artifact list on `finish`.
pub struct CsvFile {
    writer: csv::Writer<std::io::BufWriter<fs::File>>,
    path: PathBuf,
}

impl CsvFile {
    pub fn create(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        let file = fs::File::create(&path)?;
        let mut writer = csv::Writer::from_writer(std::io::BufWriter::new(file));
        writer.write_record(header)?;
        Ok(CsvFile { writer, path })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn finish(mut self, artifacts: &mut Artifacts) -> Result<()> {
        self.writer.flush()?;
        drop(self.writer);
        artifacts.record(self.path);
        Ok(())
    }
}

/// Serializes a geodesic as a JSON site list.
pub fn path_to_json(sites: &[Site]) -> serde_json::Value {
    serde_json::Value::Array(
        sites.iter().map(|s| serde_json::json!([s.x, s.t])).collect(),
    )
}
