use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use protosample::io::sidecar_path;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::Failure;

/// Record of one run: enough to repeat it and check the outputs.
/// Thread count and wall-clock time are deliberately absent.
#[derive(Debug, Default, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config: BTreeMap<String, Value>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

pub fn sha256_file(path: &Path) -> Result<String, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            ..Default::default()
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.config
            .insert(key.to_string(), serde_json::to_value(value).expect("config values serialize"));
    }

    pub fn input(&mut self, path: &Path) -> Result<(), Failure> {
        self.inputs.insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    /// A map file together with its two sidecars.
    pub fn input_map(&mut self, path: &Path) -> Result<(), Failure> {
        self.input(path)?;
        self.input(&sidecar_path(path, ".map.json"))?;
        self.input(&sidecar_path(path, ".excluded.pgm"))
    }

    /// A mask image together with its scale sidecar.
    pub fn input_mask(&mut self, path: &Path) -> Result<(), Failure> {
        self.input(path)?;
        self.input(&sidecar_path(path, ".mask.json"))
    }

    pub fn output(&mut self, path: &Path) -> Result<(), Failure> {
        self.outputs.insert(path.display().to_string(), sha256_file(path)?);
        Ok(())
    }

    /// Writes to `explicit`, or next to `primary_output` as
    /// `<output>.manifest.json`.
    pub fn write(&self, explicit: Option<&Path>, primary_output: &Path) -> Result<PathBuf, Failure> {
        let path = explicit.map(Path::to_path_buf).unwrap_or_else(|| {
            let mut name = primary_output.as_os_str().to_owned();
            name.push(".manifest.json");
            PathBuf::from(name)
        });
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}
