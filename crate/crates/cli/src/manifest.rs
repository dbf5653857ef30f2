//! JSON run manifests: enough to re-execute a run bit-for-bit.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest<C> {
    pub tool: String,
    pub version: String,
    pub command: C,
    pub outputs: Vec<PathBuf>,
    pub wall_time_ms: u64,
}

impl<C: Serialize> Manifest<C> {
    pub fn new(command: C, outputs: Vec<PathBuf>, wall_time_ms: u64) -> Self {
        Manifest {
            tool: "cnfxor".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            outputs,
            wall_time_ms,
        }
    }

    pub fn save(&self, path: &Path) -> std::io::Result<()> {
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, json + "\n")
    }
}

impl<C: for<'de> Deserialize<'de>> Manifest<C> {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read manifest {}: {e}", path.display()))?;
        serde_json::from_str(&text)
            .map_err(|e| format!("cannot parse manifest {}: {e}", path.display()))
    }
}

/// `foo.csv` → `foo.csv.manifest.json`.
pub fn default_manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_os_string();
    name.push(".manifest.json");
    PathBuf::from(name)
}
