use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::svg::{emit_svg, ChartOptions, Series};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum Format {
    #[serde(rename = "csv")]
    #[value(name = "csv")]
    Csv,
    #[serde(rename = "csv+svg")]
    #[value(name = "csv+svg")]
    CsvSvg,
}

#[derive(Debug, Clone, Serialize)]
struct Artifact {
    path: String,
    sha256: String,
    bytes: usize,
}

/// Writes artifacts into the output directory and records their checksums.
pub struct Output {
    dir: PathBuf,
    format: Format,
    artifacts: Vec<Artifact>,
}

impl Output {
    pub fn create(dir: &Path, format: Format) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Output { dir: dir.to_path_buf(), format, artifacts: Vec::new() })
    }

    pub fn svg_enabled(&self) -> bool {
        self.format == Format::CsvSvg
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(name), bytes)?;
        self.artifacts.push(Artifact {
            path: name.to_string(),
            sha256: hex::encode(Sha256::digest(bytes)),
            bytes: bytes.len(),
        });
        Ok(())
    }

    /// Writes whatever `fill` produces into `name`.
    pub fn write_with(&mut self, name: &str, fill: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        fill(&mut buf)?;
        self.write(name, &buf)
    }

    pub fn chart(&mut self, name: &str, series: &[Series], options: &ChartOptions) -> Result<()> {
        if self.svg_enabled() {
            let svg = emit_svg(series, options)?;
            self.write(name, svg.as_bytes())?;
        }
        Ok(())
    }

    /// `manifest.json`: command, seed, resolved config, summary and every
    /// artifact with its checksum.
    pub fn finish(self, command: &str, seed: u64, config: Value, summary: Value) -> Result<()> {
        let manifest = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": seed,
            "format": self.format,
            "config": config,
            "summary": summary,
            "artifacts": self.artifacts,
        });
        let text = serde_json::to_string_pretty(&manifest)?;
        fs::write(self.dir.join("manifest.json"), text + "\n")?;
        Ok(())
    }
}

/// `{:e}` formatting for a CSV row.
pub fn row(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
}
