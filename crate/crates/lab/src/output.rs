//! Output files: CSV tables with a header row, JSON documents, and the resolved
//! configuration written next to them as `run_config.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{LabError, LabResult};

/// An output directory that has been created and stamped with the run configuration.
pub struct OutDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutDir {
    pub fn create(root: &Path, config: &ExperimentConfig, command: &str) -> LabResult<Self> {
        fs::create_dir_all(root).map_err(|e| LabError::io(&format!("creating {}", root.display()), e))?;
        let mut out = OutDir { root: root.to_path_buf(), written: Vec::new() };
        let stamp = serde_json::json!({ "command": command, "config": config });
        out.json("run_config.json", &stamp)?;
        Ok(out)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Paths written so far, in order.
    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> LabResult<PathBuf> {
        let path = self.root.join(name);
        let fail = |e: &dyn std::fmt::Display| LabError::io(&format!("writing {}", path.display()), e);
        let mut writer = csv::Writer::from_path(&path).map_err(|e| fail(&e))?;
        for row in rows {
            writer.serialize(row).map_err(|e| fail(&e))?;
        }
        writer.flush().map_err(|e| fail(&e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> LabResult<PathBuf> {
        let path = self.root.join(name);
        let text = serde_json::to_string_pretty(value).map_err(|e| LabError::io("serializing", e))?;
        fs::write(&path, text + "\n").map_err(|e| LabError::io(&format!("writing {}", path.display()), e))?;
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn text(&mut self, name: &str, body: &str) -> LabResult<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, body).map_err(|e| LabError::io(&format!("writing {}", path.display()), e))?;
        self.written.push(path.clone());
        Ok(path)
    }
}
