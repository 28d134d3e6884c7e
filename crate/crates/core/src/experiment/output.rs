use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::Result;
use crate::table::Table;

/// Writes result files atomically (temporary file in the target directory,
/// then rename) with a fixed metadata header.
#[derive(Clone, Debug)]
pub struct OutputDir {
    dir: PathBuf,
    metadata: Vec<(String, String)>,
}

impl OutputDir {
    pub fn new(dir: impl Into<PathBuf>, metadata: Vec<(String, String)>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(OutputDir { dir, metadata })
    }

    pub fn path(&self) -> &Path {
        &self.dir
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        tmp.write_all(bytes)?;
        tmp.flush()?;
        let target = self.dir.join(name);
        tmp.persist(&target).map_err(|e| e.error)?;
        Ok(target)
    }

    pub fn write_table(&self, name: &str, table: &Table) -> Result<PathBuf> {
        self.write_bytes(name, table.to_csv(&self.metadata).as_bytes())
    }

    /// JSON files carry the metadata under `"meta"` next to `"records"`.
    pub fn write_json<T: Serialize>(&self, name: &str, records: &T) -> Result<PathBuf> {
        let meta: serde_json::Map<String, serde_json::Value> =
            self.metadata.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
        let doc = serde_json::json!({ "meta": meta, "records": records });
        let mut text = serde_json::to_string_pretty(&doc)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }
}
