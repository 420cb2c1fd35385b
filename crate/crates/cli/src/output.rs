//! Atomic, hashed artifact output and the run manifest.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

use crate::CliError;

/// One file written by a run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Artifact {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
    bytes: u64,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        self.bytes += n as u64;
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Writes files under one directory. Each file goes to a temporary file in
/// the same directory first and is renamed into place only once complete,
/// so a failed run never leaves a truncated artifact behind.
#[derive(Debug)]
pub struct ArtifactDir {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl ArtifactDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| {
            CliError::Config(vec![format!("output.directory {} is not writable: {e}", root.display())])
        })?;
        Ok(Self { root: root.to_path_buf(), artifacts: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    /// Streams `body` into `rel` and records its hash.
    pub fn write<F>(&mut self, rel: &str, body: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        let artifact = write_atomic(&self.root, rel, body)?;
        self.artifacts.retain(|a| a.path != artifact.path);
        self.artifacts.push(artifact);
        Ok(())
    }

    pub fn write_str(&mut self, rel: &str, text: &str) -> Result<(), CliError> {
        self.write(rel, |w| w.write_all(text.as_bytes()).map_err(CliError::from))
    }
}

/// Writes `rel` under `root` through a temporary file and returns its hash.
pub fn write_atomic<F>(root: &Path, rel: &str, body: F) -> Result<Artifact, CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    let target = root.join(rel);
    let dir = target.parent().unwrap_or(root);
    fs::create_dir_all(dir)?;
    let tmp = NamedTempFile::new_in(dir)?;
    let mut w = HashingWriter { inner: BufWriter::new(tmp), hasher: Sha256::new(), bytes: 0 };
    body(&mut w)?;
    w.flush()?;
    let HashingWriter { inner, hasher, bytes } = w;
    let tmp = inner.into_inner().map_err(|e| CliError::from(e.into_error()))?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| CliError::from(e.error))?;
    Ok(Artifact { path: rel.to_owned(), sha256: hex::encode(hasher.finalize()), bytes })
}

/// Hex SHA-256 of a file on disk.
pub fn sha256_file(path: &Path) -> io::Result<String> {
    use std::io::Read;
    let mut f = fs::File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub wall_time_s: f64,
    pub protons: u64,
    pub channeled: u64,
    pub dechanneled: u64,
    /// Human-readable failures of scan points that were skipped.
    pub failures: Vec<String>,
    /// Resolved configuration, also written to `config.toml`.
    pub config: String,
    pub artifacts: Vec<Artifact>,
}

impl Manifest {
    pub fn write(&self, root: &Path) -> Result<Artifact, CliError> {
        let text = toml::to_string(self).map_err(|e| CliError::Runtime(e.to_string()))?;
        write_atomic(root, "manifest.toml", |w| w.write_all(text.as_bytes()).map_err(CliError::from))
    }
}
