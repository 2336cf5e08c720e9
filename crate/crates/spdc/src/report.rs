//! Deterministic CSV/JSON emission with reproducibility metadata headers.
//!
//! Every emitted file carries `#`-prefixed metadata including the config
//! hash and a `config_json:` line that parses back into the exact
//! `RunConfig` that produced it.

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::twophoton::DensityMatrix;

/// Render the standard metadata header block for a data file.
pub fn metadata_header(config: &RunConfig, extra: &[(&str, String)]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# config_hash: {}", config.hash());
    let _ = writeln!(s, "# coefficient_set: {}", config.crystal.coefficient_set);
    for (key, value) in extra {
        let _ = writeln!(s, "# {key}: {value}");
    }
    let _ = writeln!(s, "# config_json: {}", config.to_canonical_json());
    s
}

/// Recover the `RunConfig` from an emitted file's `config_json:` line.
pub fn config_from_header(text: &str) -> Result<RunConfig> {
    for line in text.lines() {
        if let Some(json) = line.strip_prefix("# config_json: ") {
            return RunConfig::from_json_str(json);
        }
    }
    Err(Error::Config("no config_json header line found".into()))
}

/// Render a CSV file: metadata header, column names, then rows. Floats use
/// Rust's shortest round-trip formatting, which is deterministic.
pub fn render_csv(
    config: &RunConfig,
    extra: &[(&str, String)],
    columns: &[&str],
    rows: &[Vec<f64>],
) -> String {
    let mut s = metadata_header(config, extra);
    s.push_str("# columns: ");
    s.push_str(&columns.join(","));
    s.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// JSON form of a density matrix: separate real and imaginary 4x4 arrays.
#[derive(Debug, Clone, Serialize, serde::Deserialize)]
pub struct DensityMatrixJson {
    pub real: [[f64; 4]; 4],
    pub imag: [[f64; 4]; 4],
}

impl DensityMatrixJson {
    pub fn from_matrix(rho: &DensityMatrix) -> Self {
        let mut real = [[0.0; 4]; 4];
        let mut imag = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                real[i][j] = rho[(i, j)].re;
                imag[i][j] = rho[(i, j)].im;
            }
        }
        Self { real, imag }
    }

    pub fn to_matrix(&self) -> DensityMatrix {
        DensityMatrix::from_fn(|i, j| Complex64::new(self.real[i][j], self.imag[i][j]))
    }
}
