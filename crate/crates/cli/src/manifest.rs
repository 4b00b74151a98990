use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

/// Everything needed to repeat a command, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: &'static str,
    pub inputs: Vec<PathBuf>,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &'static str, out_dir: &Path) -> Self {
        Self {
            command,
            inputs: Vec::new(),
            out_dir: out_dir.to_path_buf(),
            seed: None,
            config: serde_json::Value::Null,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self) -> anyhow::Result<()> {
        let path = self.out_dir.join(format!("{}_manifest.json", self.command));
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
