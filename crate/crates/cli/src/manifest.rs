//! Run manifests and atomic artifact writes.
//!
//! Every subcommand writes its outputs via temp-file-plus-rename and
//! records a manifest naming the command, effective config, seed, input
//! and output hashes, and summary counts. Manifests carry no timestamps,
//! so a re-run with unchanged inputs is byte-identical.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub tool_version: String,
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    pub inputs: Vec<FileStamp>,
    pub outputs: Vec<FileStamp>,
    pub counts: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Serialize)]
pub struct FileStamp {
    pub path: String,
    pub sha256: String,
}

pub struct ManifestBuilder {
    root: PathBuf,
    manifest: Manifest,
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).with_context(|| format!("hashing {}", path.display()))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

fn hex(bytes: &[u8]) -> String {
    use std::fmt::Write;
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        write!(out, "{b:02x}").unwrap();
    }
    out
}

impl ManifestBuilder {
    pub fn new(
        command: &str,
        root: &Path,
        seed: u64,
        config: &BTreeMap<String, String>,
    ) -> Self {
        ManifestBuilder {
            root: root.to_path_buf(),
            manifest: Manifest {
                command: command.to_string(),
                tool_version: TOOL_VERSION.to_string(),
                seed,
                config: config.clone(),
                inputs: Vec::new(),
                outputs: Vec::new(),
                counts: BTreeMap::new(),
            },
        }
    }

    fn relative(&self, path: &Path) -> String {
        path.strip_prefix(&self.root)
            .unwrap_or(path)
            .display()
            .to_string()
    }

    pub fn input(&mut self, path: &Path) -> Result<()> {
        let stamp = FileStamp {
            path: self.relative(path),
            sha256: sha256_file(path)?,
        };
        self.manifest.inputs.push(stamp);
        Ok(())
    }

    /// Records every regular file under `dir` (sorted) as an input.
    pub fn input_dir(&mut self, dir: &Path) -> Result<()> {
        let mut paths = Vec::new();
        collect_files(dir, &mut paths)?;
        paths.sort();
        for path in paths {
            self.input(&path)?;
        }
        Ok(())
    }

    pub fn count(&mut self, key: &str, value: impl Serialize) {
        self.manifest.counts.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable count"),
        );
    }

    /// Atomically writes an output file and records its hash.
    pub fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)?;
        self.manifest.outputs.push(FileStamp {
            path: self.relative(path),
            sha256: hex(&Sha256::digest(bytes)),
        });
        Ok(())
    }

    /// Writes the manifest itself under `<output_dir>/manifests/`.
    pub fn finish(mut self, output_dir: &Path) -> Result<()> {
        self.manifest.inputs.sort_by(|a, b| a.path.cmp(&b.path));
        self.manifest.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        let path = output_dir
            .join("manifests")
            .join(format!("{}.json", self.manifest.command));
        let mut bytes = serde_json::to_vec_pretty(&self.manifest)?;
        bytes.push(b'\n');
        write_atomic(&path, &bytes)
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in
        std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?
    {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// Write-temp-then-rename so partial artifacts are never observable.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().context("output path has no parent")?;
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))?;
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    std::fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}
