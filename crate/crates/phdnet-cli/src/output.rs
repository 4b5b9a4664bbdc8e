//! Report writing: provenance blocks, atomic file writes, display rounding.
//!
//! Outputs are deterministic: provenance carries input digests and a config
//! echo but never a timestamp, and files are written through a temp-and-
//! rename so a failed run leaves nothing partial behind.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use phdnet::error::Result;

/// Reproducibility header: digests of every input plus the config echo.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub generator: String,
    pub inputs: BTreeMap<String, String>,
    pub config: BTreeMap<String, String>,
}

impl Provenance {
    pub fn new(config: BTreeMap<String, String>) -> Self {
        Self {
            generator: format!("phdnet {}", env!("CARGO_PKG_VERSION")),
            inputs: BTreeMap::new(),
            config,
        }
    }

    /// Records the sha256 of one input file.
    pub fn add_input(&mut self, label: &str, path: &Path) -> Result<()> {
        let bytes = fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.inputs.insert(label.to_string(), format!("{} sha256={hex}", path.display()));
        Ok(())
    }

    /// Comment block prepended to CSV outputs.
    pub fn csv_header(&self) -> String {
        let mut out = format!("# generator: {}\n", self.generator);
        for (label, desc) in &self.inputs {
            out.push_str(&format!("# input {label}: {desc}\n"));
        }
        for (key, value) in &self.config {
            out.push_str(&format!("# config {key}: {value}\n"));
        }
        out
    }
}

/// Writes bytes through a temporary file in the same directory, then renames.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp: PathBuf = match path.file_name() {
        Some(name) => path.with_file_name(format!(".{}.tmp", name.to_string_lossy())),
        None => path.with_extension("tmp"),
    };
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// JSON report with the provenance block inlined.
pub fn write_json<T: Serialize>(path: &Path, provenance: &Provenance, body: &T) -> Result<()> {
    #[derive(Serialize)]
    struct Document<'a, T> {
        provenance: &'a Provenance,
        #[serde(flatten)]
        body: &'a T,
    }
    let text = serde_json::to_string_pretty(&Document { provenance, body })
        .map_err(|e| phdnet::error::Error::Data(format!("serialization failed: {e}")))?;
    atomic_write(path, &format!("{text}\n"))
}

/// CSV report: provenance comments, then the payload.
pub fn write_csv(path: &Path, provenance: &Provenance, payload: &str) -> Result<()> {
    atomic_write(path, &format!("{}{payload}", provenance.csv_header()))
}

/// Centrality display convention: four decimal places.
pub fn fmt_score(value: f64) -> String {
    format!("{value:.4}")
}

/// Statistics display convention: three decimal places.
pub fn fmt_stat(value: f64) -> String {
    if value.is_nan() {
        "NA".to_string()
    } else if value.is_infinite() {
        if value > 0.0 { "inf".to_string() } else { "-inf".to_string() }
    } else {
        format!("{value:.3}")
    }
}
