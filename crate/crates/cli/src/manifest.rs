use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::{Command, RunOutput};
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// The resolved command, tagged by subcommand name.
    pub config: Command,
    pub seed: Option<u64>,
    pub version: String,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write(dir: &Path, command: &Command, output: &RunOutput) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut outputs = Vec::with_capacity(output.files.len());
    for (name, contents) in &output.files {
        fs::write(dir.join(name), contents)?;
        outputs.push(FileDigest {
            path: name.clone(),
            sha256: sha256_hex(contents.as_bytes()),
        });
    }
    let inputs = output
        .inputs
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.clone(),
                sha256: sha256_hex(&fs::read(p)?),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let manifest = RunManifest {
        subcommand: command.name().to_string(),
        config: command.clone(),
        seed: command.seed(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        inputs,
        outputs,
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join(MANIFEST_FILE), text)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Command, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let m: RunManifest = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(m.config)
}
