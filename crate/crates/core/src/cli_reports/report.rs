//! Artifacts: CSV tables with schema files, JSON documents, and the run manifest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{param_units, Input, RunConfig};
use crate::error::Result;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Column description written to `<table>.schema.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub description: String,
}

pub fn col(name: &str, unit: &str, description: &str) -> Column {
    Column { name: name.into(), unit: unit.into(), description: description.into() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub table: String,
    pub columns: Vec<Column>,
}

/// Collects artifacts under one output directory.
#[derive(Debug)]
pub struct ArtifactWriter {
    pub dir: PathBuf,
    pub written: Vec<String>,
}

impl ArtifactWriter {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), written: Vec::new() })
    }

    fn record(&mut self, name: &str) -> PathBuf {
        self.written.push(name.to_string());
        self.dir.join(name)
    }

    /// Table with a header row and its schema alongside.
    pub fn table(&mut self, name: &str, columns: &[Column], rows: &[Vec<String>]) -> Result<()> {
        let path = self.record(&format!("{name}.csv"));
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(columns.iter().map(|c| c.name.as_str()))?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        let schema = Schema { table: format!("{name}.csv"), columns: columns.to_vec() };
        self.json(&format!("{name}.schema"), &schema)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let path = self.record(&format!("{name}.json"));
        std::fs::write(path, serde_json::to_string_pretty(value)? + "\n")?;
        Ok(())
    }

    pub fn raw(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.record(name);
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// Deterministic cell formatting: shortest round-trip for finite values.
pub fn cell(v: f64) -> String {
    if v.is_finite() {
        format!("{v:e}")
    } else {
        String::new()
    }
}

pub fn opt_cell(v: Option<f64>) -> String {
    v.map(cell).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputRecord {
    pub value: String,
    pub sha256: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub inputs: BTreeMap<String, InputRecord>,
    /// Hash over the sorted input keys, values and file contents.
    pub inputs_hash: String,
    pub params: toml::Value,
    pub deltas: Vec<f64>,
    pub units: BTreeMap<String, String>,
    pub artifacts: Vec<String>,
    pub status: String,
    pub exit_code: i32,
    pub unix_time: u64,
}

pub fn input_records(cfg: &RunConfig, base: &Path) -> Result<(BTreeMap<String, InputRecord>, String)> {
    let mut all = Sha256::new();
    let mut out = BTreeMap::new();
    for (k, v) in &cfg.inputs {
        all.update(k.as_bytes());
        all.update([0]);
        all.update(v.as_bytes());
        all.update([0]);
        let sha = match cfg.input(k, base)? {
            Input::File(p) => {
                let bytes = std::fs::read(p)?;
                all.update(&bytes);
                Some(sha256_hex(&bytes))
            }
            Input::Builtin(_) => None,
        };
        out.insert(k.clone(), InputRecord { value: v.clone(), sha256: sha });
    }
    let hash = all.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok((out, hash))
}

pub fn manifest(cfg: &RunConfig, base: &Path, artifacts: Vec<String>, status: &str, exit_code: i32) -> Result<Manifest> {
    let (inputs, inputs_hash) = input_records(cfg, base)?;
    let params = toml::Value::try_from(&cfg.params).map_err(|e| crate::Error::Format(e.to_string()))?;
    let unix_time = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: cfg.command.name().into(),
        inputs,
        inputs_hash,
        params,
        deltas: cfg.deltas(),
        units: param_units().into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        artifacts,
        status: status.into(),
        exit_code,
        unix_time,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn table_and_schema_are_written() {
        let d = tempfile::tempdir().unwrap();
        let mut w = ArtifactWriter::new(d.path()).unwrap();
        w.table("t", &[col("x", "t", "abscissa")], &[vec![cell(0.5)], vec![cell(f64::NAN)]]).unwrap();
        let body = std::fs::read_to_string(d.path().join("t.csv")).unwrap();
        assert_eq!(body, "x\n5e-1\n\"\"\n");
        let s: Schema = serde_json::from_str(&std::fs::read_to_string(d.path().join("t.schema.json")).unwrap()).unwrap();
        assert_eq!(s.columns[0].name, "x");
        assert_eq!(w.written, vec!["t.csv", "t.schema.json"]);
    }
}
