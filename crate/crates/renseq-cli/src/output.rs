//! CSV and provenance writers. One-line headers, deterministic column
//! order, shortest-round-trip float formatting: trivially plottable and
//! diffable in golden tests.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::CliError;

pub struct CsvWriter {
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &str) -> Result<Self, CliError> {
        Self::create_with_preamble(path, &[], header)
    }

    /// Comment lines (prefixed `#`) above the column header.
    pub fn create_with_preamble(
        path: &Path,
        comments: &[String],
        header: &str,
    ) -> Result<Self, CliError> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent)?;
            }
        }
        let mut out = BufWriter::new(File::create(path)?);
        for line in comments {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "{header}")?;
        Ok(Self { out })
    }

    pub fn row(&mut self, fields: std::fmt::Arguments<'_>) -> Result<(), CliError> {
        writeln!(self.out, "{fields}")?;
        Ok(())
    }

    #[allow(dead_code)]
    pub fn comment(&mut self, line: &str) -> Result<(), CliError> {
        writeln!(self.out, "# {line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.out.flush()?;
        Ok(())
    }
}

/// Every run drops a provenance file next to its outputs: library version,
/// resolved configuration, a stable hash of it, and the produced paths.
/// Re-running the recorded command reproduces the outputs bit for bit.
#[derive(Serialize)]
pub struct Provenance<'a, C: Serialize> {
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    pub config_hash: String,
    pub outputs: Vec<String>,
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn write_provenance<C: Serialize>(
    path: &Path,
    command: &str,
    config: &C,
    outputs: &[PathBuf],
) -> Result<(), CliError> {
    let config_json = serde_json::to_string(config)
        .map_err(|e| CliError::Config(format!("provenance serialization: {e}")))?;
    let record = Provenance {
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        config_hash: format!("{:016x}", fnv1a(config_json.as_bytes())),
        outputs: outputs
            .iter()
            .map(|p| p.display().to_string())
            .collect(),
    };
    let text = serde_json::to_string_pretty(&record)
        .map_err(|e| CliError::Config(format!("provenance serialization: {e}")))?;
    std::fs::write(path, text)?;
    Ok(())
}

/// `stem.provenance.json` next to an output file.
pub fn provenance_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".provenance.json");
    out.with_file_name(name)
}
