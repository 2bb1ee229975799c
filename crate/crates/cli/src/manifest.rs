use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

pub fn digest(path: &Path) -> Result<FileDigest> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(FileDigest {
        path: path.to_path_buf(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

/// Record of one command run, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub tool_version: &'static str,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub wall_clock_secs: f64,
}

pub struct Recorder {
    command: &'static str,
    argv: Vec<String>,
    started: Instant,
}

impl Recorder {
    pub fn start(command: &'static str, argv: &[String]) -> Recorder {
        Recorder {
            command,
            argv: argv.to_vec(),
            started: Instant::now(),
        }
    }

    pub fn finish(
        self,
        path: &Path,
        config: impl Serialize,
        seeds: Vec<u64>,
        inputs: &[&Path],
        outputs: &[PathBuf],
    ) -> Result<()> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            argv: self.argv,
            config: serde_json::to_value(config)?,
            seeds,
            tool_version: env!("CARGO_PKG_VERSION"),
            inputs: inputs.iter().map(|p| digest(p)).collect::<Result<_>>()?,
            outputs: outputs.iter().map(|p| digest(p)).collect::<Result<_>>()?,
            wall_clock_secs: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
        log::info!("manifest written to {}", path.display());
        Ok(())
    }
}
