//! The calibration cache: one versioned JSON file holding calibrated
//! standardizers, sigma estimates and small-sample percentile tables, each
//! entry carrying the parameters and seed that produced it. Writes are
//! atomic (write to a temporary file in the same directory, then rename),
//! and serialization order is deterministic, so recalibrating with
//! identical inputs rewrites identical bytes.

use crate::error::{CliError, Result};
use kendep::independence::{CalibrationTable, SigmaPi};
use kendep::standardize::StandardizerPhi;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const CACHE_FORMAT_VERSION: u32 = 1;
pub const CACHE_ENV_VAR: &str = "KENDEP_CACHE";
pub const DEFAULT_CACHE_FILE: &str = "kendep_cache.json";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationCache {
    pub version: u32,
    /// Creation metadata: the tool that wrote the file.
    pub tool: String,
    /// Standardizer per dimension, keyed by d.
    #[serde(default)]
    pub phi: BTreeMap<String, StandardizerPhi>,
    /// Sigma estimate per dimension, keyed by d.
    #[serde(default)]
    pub sigma: BTreeMap<String, SigmaPi>,
    /// Percentile tables keyed by "d/n".
    #[serde(default)]
    pub percentiles: BTreeMap<String, CalibrationTable>,
}

impl Default for CalibrationCache {
    fn default() -> Self {
        CalibrationCache {
            version: CACHE_FORMAT_VERSION,
            tool: format!("kendep {}", env!("CARGO_PKG_VERSION")),
            phi: BTreeMap::new(),
            sigma: BTreeMap::new(),
            percentiles: BTreeMap::new(),
        }
    }
}

impl CalibrationCache {
    /// The cache path: explicit flag, else $KENDEP_CACHE, else the default
    /// file in the working directory.
    pub fn resolve_path(flag: Option<&Path>) -> PathBuf {
        if let Some(p) = flag {
            return p.to_path_buf();
        }
        if let Ok(env) = std::env::var(CACHE_ENV_VAR) {
            if !env.is_empty() {
                return PathBuf::from(env);
            }
        }
        PathBuf::from(DEFAULT_CACHE_FILE)
    }

    /// Load a cache; a missing file yields an empty cache.
    pub fn load(path: &Path) -> Result<Self> {
        match std::fs::read_to_string(path) {
            Ok(text) => {
                let cache: CalibrationCache = serde_json::from_str(&text)?;
                if cache.version != CACHE_FORMAT_VERSION {
                    return Err(CliError::Config(format!(
                        "cache {} has format version {}, expected {}",
                        path.display(),
                        cache.version,
                        CACHE_FORMAT_VERSION
                    )));
                }
                Ok(cache)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(CliError::io(path.display().to_string(), e)),
        }
    }

    /// Atomic save: temp file in the target directory, then rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
        if let Some(dir) = dir {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display().to_string(), e))?;
        }
        let tmp = path.with_extension("json.tmp");
        std::fs::write(&tmp, text).map_err(|e| CliError::io(tmp.display().to_string(), e))?;
        std::fs::rename(&tmp, path).map_err(|e| CliError::io(path.display().to_string(), e))
    }

    pub fn phi_for(&self, d: usize) -> Option<&StandardizerPhi> {
        self.phi.get(&d.to_string())
    }

    pub fn set_phi(&mut self, phi: StandardizerPhi) {
        self.phi.insert(phi.d().to_string(), phi);
    }

    pub fn sigma_for(&self, d: usize) -> Option<&SigmaPi> {
        self.sigma.get(&d.to_string())
    }

    pub fn set_sigma(&mut self, sigma: SigmaPi) {
        self.sigma.insert(sigma.d.to_string(), sigma);
    }

    pub fn percentiles_for(&self, d: usize, n: usize) -> Option<&CalibrationTable> {
        self.percentiles.get(&format!("{d}/{n}"))
    }

    pub fn set_percentiles(&mut self, table: CalibrationTable) {
        self.percentiles
            .insert(format!("{}/{}", table.d, table.n), table);
    }
}
