use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::states::io::{from_raw, to_raw, RawMatrix};
use crate::states::DensityMatrix;

/// A stored reference value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub instance_hash: String,
    /// How the value was obtained, e.g. `simplex-grid` or `long-run`.
    pub method: String,
    pub value: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    optimizer: Option<RawMatrix>,
}

impl FixtureEntry {
    pub fn new(
        instance_hash: impl Into<String>,
        method: impl Into<String>,
        value: f64,
        tolerance: f64,
    ) -> Self {
        Self {
            instance_hash: instance_hash.into(),
            method: method.into(),
            value,
            tolerance,
            resolution: None,
            optimizer: None,
        }
    }

    pub fn with_resolution(mut self, resolution: f64) -> Self {
        self.resolution = Some(resolution);
        self
    }

    pub fn with_optimizer(mut self, optimizer: &DensityMatrix) -> Self {
        self.optimizer = Some(to_raw(optimizer.matrix()));
        self
    }

    pub fn optimizer(&self) -> Result<Option<DensityMatrix>> {
        self.optimizer
            .as_ref()
            .map(|m| from_raw(m, m.len(), 0))
            .transpose()
    }
}

/// Reference values keyed by a caller-chosen string, stored as sorted JSON.
#[derive(Debug)]
pub struct FixtureStore {
    path: PathBuf,
    entries: BTreeMap<String, FixtureEntry>,
    dirty: bool,
}

impl FixtureStore {
    /// Opens `path`, starting empty when the file does not exist.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let entries = match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e.into()),
        };
        Ok(Self {
            path,
            entries,
            dirty: false,
        })
    }

    pub fn get(&self, key: &str) -> Option<&FixtureEntry> {
        self.entries.get(key)
    }

    pub fn insert(&mut self, key: impl Into<String>, entry: FixtureEntry) {
        self.entries.insert(key.into(), entry);
        self.dirty = true;
    }

    /// Returns the stored entry, computing and recording it when absent.
    pub fn get_or_compute(
        &mut self,
        key: &str,
        compute: impl FnOnce() -> Result<FixtureEntry>,
    ) -> Result<FixtureEntry> {
        if let Some(e) = self.entries.get(key) {
            return Ok(e.clone());
        }
        let e = compute()?;
        self.insert(key, e.clone());
        Ok(e)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes the file if anything changed.
    pub fn save(&mut self) -> Result<()> {
        if !self.dirty {
            return Ok(());
        }
        if let Some(dir) = self.path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut text = serde_json::to_string_pretty(&self.entries)
            .map_err(|e| Error::Numerical(format!("fixture serialization: {e}")))?;
        text.push('\n');
        fs::write(&self.path, text)?;
        self.dirty = false;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{random_density, Seed};

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("f.json");
        let opt = random_density(2, Seed(1)).unwrap();
        let mut s = FixtureStore::open(&path).unwrap();
        assert!(s.is_empty());
        let e = FixtureEntry::new("abc", "bloch-grid", -0.123456789012345, 1e-3)
            .with_resolution(5e-3)
            .with_optimizer(&opt);
        s.insert("k", e.clone());
        s.save().unwrap();
        let mut t = FixtureStore::open(&path).unwrap();
        assert_eq!(t.get("k"), Some(&e));
        assert_eq!(t.get("k").unwrap().optimizer().unwrap().unwrap(), opt);
        let mut called = false;
        t.get_or_compute("k", || {
            called = true;
            Ok(e.clone())
        })
        .unwrap();
        assert!(!called);
    }
}
