//! Run manifests: a provenance record written beside every artifact.
//!
//! Each command writes one manifest describing the run — command name,
//! seed, config snapshot, and sha256 checksums of every input and
//! output — as `<artifact>.manifest.json` next to each output file.
//! Downstream commands verify an input against its manifest before
//! reading it, so a truncated or hand-edited artifact fails loudly
//! instead of silently skewing results. Rerunning a stage with the
//! same seed must reproduce the same output checksums; the manifest is
//! the instrument that makes that checkable.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const MANIFEST_FORMAT_NAME: &str = "attriq-manifest";
const MANIFEST_FORMAT_VERSION: u32 = 1;

/// Provenance of one command invocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub format: String,
    pub format_version: u32,
    pub command: String,
    pub seed: u64,
    /// Snapshot of the effective settings, after flag and config-file
    /// resolution.
    pub config: serde_json::Value,
    /// Input path -> sha256 of its bytes at read time.
    pub inputs: BTreeMap<String, String>,
    /// Output path -> sha256 of its bytes at write time.
    pub outputs: BTreeMap<String, String>,
    pub duration_ms: u64,
}

impl RunManifest {
    /// Checksum the given inputs and outputs into a manifest.
    pub fn build(
        command: &str,
        seed: u64,
        config: serde_json::Value,
        inputs: &[&Path],
        outputs: &[&Path],
        duration_ms: u64,
    ) -> Result<RunManifest> {
        let mut input_sums = BTreeMap::new();
        for path in inputs {
            input_sums.insert(path.display().to_string(), checksum_file(path)?);
        }
        let mut output_sums = BTreeMap::new();
        for path in outputs {
            output_sums.insert(path.display().to_string(), checksum_file(path)?);
        }
        Ok(RunManifest {
            format: MANIFEST_FORMAT_NAME.to_string(),
            format_version: MANIFEST_FORMAT_VERSION,
            command: command.to_string(),
            seed,
            config,
            inputs: input_sums,
            outputs: output_sums,
            duration_ms,
        })
    }

    /// Write a copy of the manifest beside every output artifact.
    pub fn write(&self) -> Result<()> {
        for path in self.outputs.keys() {
            let manifest_path = manifest_path(Path::new(path));
            let mut out = BufWriter::new(File::create(&manifest_path)?);
            serde_json::to_writer_pretty(&mut out, self)
                .map_err(|e| Error::corrupt(&manifest_path, e.to_string()))?;
            out.write_all(b"\n")?;
            out.flush()?;
        }
        Ok(())
    }
}

/// Where the manifest for `artifact` lives.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    PathBuf::from(format!("{}.manifest.json", artifact.display()))
}

/// Hex sha256 of a file's bytes.
pub fn checksum_file(path: &Path) -> Result<String> {
    let mut file = File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(digest.len() * 2);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}

/// Load a manifest file, rejecting unknown formats and versions.
pub fn load_manifest(path: &Path) -> Result<RunManifest> {
    let file = File::open(path)?;
    let manifest: RunManifest = serde_json::from_reader(file)
        .map_err(|e| Error::corrupt(path, e.to_string()))?;
    if manifest.format != MANIFEST_FORMAT_NAME {
        return Err(Error::corrupt(
            path,
            format!("unexpected format {:?}", manifest.format),
        ));
    }
    if manifest.format_version != MANIFEST_FORMAT_VERSION {
        return Err(Error::VersionMismatch {
            path: path.display().to_string(),
            found: manifest.format_version,
            expected: MANIFEST_FORMAT_VERSION,
        });
    }
    Ok(manifest)
}

/// Check an input artifact against the manifest sitting beside it.
///
/// An artifact without a manifest passes (hand-written inputs are
/// legitimate); an artifact whose recorded checksum no longer matches
/// its bytes does not.
pub fn verify_input(path: &Path) -> Result<()> {
    let mpath = manifest_path(path);
    if !mpath.exists() {
        return Ok(());
    }
    let manifest = load_manifest(&mpath)?;
    let wanted = path.display().to_string();
    let recorded = manifest.outputs.get(&wanted).or_else(|| {
        // the writer may have used a different path spelling; fall
        // back to matching on file name
        let name = path.file_name();
        manifest
            .outputs
            .iter()
            .find(|(k, _)| Path::new(k).file_name() == name)
            .map(|(_, v)| v)
    });
    let Some(expected) = recorded else {
        return Ok(());
    };
    let actual = checksum_file(path)?;
    if &actual != expected {
        return Err(Error::ChecksumMismatch {
            path: path.display().to_string(),
            expected: expected.clone(),
            actual,
        });
    }
    Ok(())
}
