//! Run configuration: crystal/pump/output settings loaded from TOML with
//! CLI-flag overrides, plus the canonical hash used to stamp output files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dispersion::{CrystalSpec, SetRegistry, DEFAULT_SET};
use crate::error::{Error, Result};
use crate::phasematch::PumpSpec;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct CrystalConfig {
    pub period_um: f64,
    pub length_mm: f64,
    pub coefficient_set: String,
}

impl Default for CrystalConfig {
    fn default() -> Self {
        Self {
            period_um: 10.0,
            length_mm: 10.0,
            coefficient_set: DEFAULT_SET.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PumpConfig {
    pub lambda_nm: f64,
    pub bandwidth_ghz: f64,
    pub power_mw: f64,
}

impl Default for PumpConfig {
    fn default() -> Self {
        Self {
            lambda_nm: 406.2,
            bandwidth_ghz: 0.2,
            power_mw: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub seed: u64,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            seed: 1,
        }
    }
}

/// Complete reproducible description of one run.
#[derive(Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub crystal: CrystalConfig,
    pub pump: PumpConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Canonical single-line JSON form (field order fixed by the struct).
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config JSON error: {e}")))
    }

    /// SHA-256 over the canonical JSON, hex-encoded.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_canonical_json().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Resolve the crystal against the coefficient-set registry.
    pub fn crystal_spec(&self, registry: &SetRegistry) -> Result<CrystalSpec> {
        let set = registry.get(&self.crystal.coefficient_set)?.clone();
        Ok(CrystalSpec::new(
            self.crystal.period_um,
            self.crystal.length_mm,
            set,
        ))
    }

    pub fn pump_spec(&self) -> PumpSpec {
        PumpSpec::new(
            self.pump.lambda_nm,
            self.pump.bandwidth_ghz,
            self.pump.power_mw,
        )
    }
}
