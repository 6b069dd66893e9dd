use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use wlab_core::{Error, Result};

use crate::config::ExperimentConfig;

#[derive(Debug, Serialize)]
pub struct Seeds {
    pub base_seed: u64,
    /// Number of per-sample streams drawn from the base seed.
    pub streams: u64,
}

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: PathBuf,
    pub sha256: String,
}

/// Written next to the primary output. Its `settings` table can be fed back
/// through `--manifest` to repeat the run.
#[derive(Debug, Serialize)]
pub struct RunManifest<'a> {
    pub config: &'a ExperimentConfig,
    pub settings: &'a BTreeMap<String, String>,
    pub code_version: &'static str,
    pub wall_time_seconds: f64,
    pub seeds: Seeds,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let digest = Sha256::digest(fs::read(path)?);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn write_manifest(
    config: &ExperimentConfig,
    streams: u64,
    outputs: &[PathBuf],
    wall_time_seconds: f64,
) -> Result<PathBuf> {
    let outputs = outputs
        .iter()
        .map(|p| {
            Ok(OutputFile {
                path: p.clone(),
                sha256: sha256_file(p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let m = RunManifest {
        config,
        settings: &config.settings,
        code_version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds,
        seeds: Seeds {
            base_seed: config.seed,
            streams,
        },
        outputs,
    };
    let path = manifest_path(&config.output);
    let text = serde_json::to_string_pretty(&m).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(&path, text + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_known_text() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("abc");
        fs::write(&p, "abc").unwrap();
        assert_eq!(
            sha256_file(&p).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
        assert!(manifest_path(Path::new("out/a.csv")).ends_with("a.csv.manifest.json"));
    }
}
