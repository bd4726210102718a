//! Output directory bookkeeping and the checksum manifest.

use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use biphoton::io::{csv, pgm, report};
use biphoton::Map2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifacts: Vec<ManifestEntry>,
}

pub struct Artifacts {
    dir: PathBuf,
    inputs: Vec<PathBuf>,
    written: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path, inputs: &[&Path]) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        let dir = dir.canonicalize()?;
        let inputs = inputs.iter().filter_map(|p| p.canonicalize().ok()).collect();
        Ok(Artifacts { dir, inputs, written: Vec::new() })
    }

    /// Reserve `name` inside the output directory.
    pub fn path(&mut self, name: &str) -> CliResult<PathBuf> {
        let p = self.dir.join(name);
        if self.inputs.contains(&p) {
            return Err(CliError::Usage(format!("output {} would overwrite an input", p.display())));
        }
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(p)
    }

    pub fn csv(&mut self, name: &str, map: &Map2) -> CliResult<()> {
        let p = self.path(name)?;
        csv::save_map_csv(map, &p)?;
        Ok(())
    }

    /// Heatmap plus its scaling sidecar.
    pub fn pgm(&mut self, name: &str, map: &Map2) -> CliResult<()> {
        let p = self.path(name)?;
        self.path(&format!("{name}.txt"))?;
        pgm::write_pgm(map, &p)?;
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> CliResult<()> {
        let p = self.path(name)?;
        report::write_json(value, &p)?;
        Ok(())
    }

    /// Hash every artifact written so far into `manifest.json`, keeping
    /// entries from earlier runs into the same directory.
    pub fn finish(self) -> CliResult<Manifest> {
        let manifest_path = self.dir.join(MANIFEST);
        let mut manifest: Manifest = if manifest_path.exists() {
            report::read_json(&manifest_path).unwrap_or_default()
        } else {
            Manifest::default()
        };
        for name in &self.written {
            let p = self.dir.join(name);
            if !p.exists() {
                continue;
            }
            let (bytes, sha256) = hash_file(&p)?;
            manifest.artifacts.retain(|e| &e.path != name);
            manifest.artifacts.push(ManifestEntry { path: name.clone(), bytes, sha256 });
        }
        manifest.artifacts.sort_by(|a, b| a.path.cmp(&b.path));
        report::write_json(&manifest, &manifest_path)?;
        Ok(manifest)
    }
}

pub fn hash_file(path: &Path) -> CliResult<(u64, String)> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut total = 0u64;
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        total += n as u64;
        h.update(&buf[..n]);
    }
    let hex = h.finalize().iter().map(|b| format!("{b:02x}")).collect();
    Ok((total, hex))
}
