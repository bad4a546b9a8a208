use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Everything needed to re-run a command: arguments, seeds, parameters and
/// content hashes of the inputs. The wall-clock entry is the only field that
/// differs between otherwise identical runs.
#[derive(Debug)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub master_seed: Option<u64>,
    pub parameters: BTreeMap<String, Value>,
    pub input_hashes: BTreeMap<String, String>,
    pub task_seeds: Vec<u64>,
    pub outputs: Vec<String>,
    started: Instant,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl RunManifest {
    pub fn new(command_line: Vec<String>, master_seed: Option<u64>) -> Self {
        Self {
            command_line,
            master_seed,
            parameters: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
            task_seeds: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn param(&mut self, key: &str, v: impl Into<Value>) {
        self.parameters.insert(key.into(), v.into());
    }

    pub fn hash_input(&mut self, path: &Path) -> Result<()> {
        let bytes = std::fs::read(path)?;
        self.input_hashes.insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command_line": self.command_line,
            "master_seed": self.master_seed,
            "package": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "parameters": self.parameters,
            "input_hashes": self.input_hashes,
            "task_seeds": self.task_seeds,
            "outputs": self.outputs,
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(&self.to_json())?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// `<file>.manifest.json` next to a single-file output.
pub fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}
