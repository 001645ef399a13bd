use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheRecord {
    pub key: String,
    /// `hit`, `miss`, `rewritten` or `disabled`.
    pub status: String,
    pub path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub series: String,
    pub window: (f64, f64),
    pub rate: f64,
    pub amplitude: f64,
    pub rsq: f64,
}

/// What a command did, written as `manifest.json` next to its outputs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// The configuration in key=value form; reparses to the value that ran.
    pub config: String,
    pub scheme: String,
    pub cache: Vec<CacheRecord>,
    pub outputs: Vec<String>,
    pub timings_s: BTreeMap<String, f64>,
    pub checks: Vec<CheckOutcome>,
    pub fits: Vec<FitRecord>,
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| crate::Error::Format(format!("manifest serialization: {e}")))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}
