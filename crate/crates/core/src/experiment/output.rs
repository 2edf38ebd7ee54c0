use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Version of the table layouts written by the experiment commands.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub rows: usize,
    pub sha256: String,
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
struct JsonTable<'a, T> {
    schema_version: u32,
    table: &'a str,
    seed: u64,
    rows: &'a [T],
}

/// Writes result tables into one directory and remembers their digests.
#[derive(Debug)]
pub struct TableWriter {
    dir: PathBuf,
    format: Format,
    seed: u64,
    files: Vec<FileEntry>,
}

impl TableWriter {
    pub fn new(dir: &Path, format: Format, seed: u64) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), format, seed, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    pub fn write<T: Serialize>(&mut self, table: &str, rows: &[T]) -> Result<PathBuf> {
        let bytes = match self.format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                for row in rows {
                    w.serialize(row).map_err(|e| Error::Config(format!("csv encoding of {table}: {e}")))?;
                }
                w.into_inner().map_err(|e| Error::Io(e.into_error()))?
            }
            Format::Json => {
                let mut v = serde_json::to_vec_pretty(&JsonTable { schema_version: SCHEMA_VERSION, table, seed: self.seed, rows })?;
                v.push(b'\n');
                v
            }
        };
        let name = format!("{table}.{}", self.format.extension());
        let path = self.dir.join(&name);
        fs::write(&path, &bytes)?;
        self.files.push(FileEntry { name, rows: rows.len(), sha256: sha256_hex(&bytes) });
        Ok(path)
    }
}

/// Provenance record stored as `manifest.json` next to the tables.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub schema_version: u32,
    pub seed: u64,
    pub trials: u64,
    pub format: Format,
    pub config_sha256: String,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        fs::write(&path, bytes)?;
        Ok(path)
    }
}
