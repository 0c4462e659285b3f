//! Run manifest: a flat key=value record of what ran and what it produced.
//!
//! The manifest is written after every other output file, so its presence
//! marks a completed run, and each listed file carries a sha256 digest for
//! verification. Honors SOURCE_DATE_EPOCH so archived runs can be made
//! byte-reproducible.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use chrono::{DateTime, Utc};
use sha2::{Digest, Sha256};

pub struct Manifest {
    entries: Vec<(String, String)>,
    outputs: Vec<PathBuf>,
    out_dir: PathBuf,
}

fn timestamp() -> String {
    let secs = match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v.parse::<i64>().unwrap_or(0),
        Err(_) => SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs() as i64)
            .unwrap_or(0),
    };
    DateTime::<Utc>::from_timestamp(secs, 0)
        .unwrap_or_else(|| DateTime::<Utc>::from_timestamp(0, 0).unwrap())
        .to_rfc3339()
}

impl Manifest {
    pub fn start(out_dir: &Path, subcommand: &str) -> Manifest {
        let mut m = Manifest {
            entries: Vec::new(),
            outputs: Vec::new(),
            out_dir: out_dir.to_path_buf(),
        };
        m.put("tool", env!("CARGO_PKG_NAME"));
        m.put("version", env!("CARGO_PKG_VERSION"));
        m.put("subcommand", subcommand);
        m.put("started", timestamp());
        m
    }

    pub fn put(&mut self, key: &str, value: impl Display) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    /// Register an already-written output file living under the out dir.
    pub fn add_output(&mut self, path: &Path) {
        self.outputs.push(path.to_path_buf());
    }

    /// Digest the outputs and write `manifest.txt`, the completion marker.
    pub fn finish(mut self) -> Result<()> {
        self.entries.push(("finished".into(), timestamp()));
        let mut text = String::new();
        for (k, v) in &self.entries {
            text.push_str(&format!("{k} = {v}\n"));
        }
        for path in &self.outputs {
            let bytes = std::fs::read(path)
                .with_context(|| format!("cannot digest output {}", path.display()))?;
            let digest = Sha256::digest(&bytes);
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            let name = path
                .strip_prefix(&self.out_dir)
                .unwrap_or(path)
                .display();
            text.push_str(&format!("output.{name} = sha256:{hex}\n"));
        }
        std::fs::write(self.out_dir.join("manifest.txt"), text)
            .with_context(|| format!("cannot write manifest in {}", self.out_dir.display()))?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_lists_digests_and_is_written_last() {
        let dir = tempfile::tempdir().unwrap();
        let data_path = dir.path().join("data.csv");
        std::fs::write(&data_path, b"a,b\n1,2\n").unwrap();

        let mut m = Manifest::start(dir.path(), "simulate");
        m.put("seed", 7u64);
        m.add_output(&data_path);
        m.finish().unwrap();

        let text = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        assert!(text.contains("subcommand = simulate"), "{text}");
        assert!(text.contains("seed = 7"), "{text}");
        // digest of the exact bytes written above
        let expect = Sha256::digest(b"a,b\n1,2\n");
        let hex: String = expect.iter().map(|b| format!("{b:02x}")).collect();
        assert!(text.contains(&format!("output.data.csv = sha256:{hex}")), "{text}");
    }

    #[test]
    fn source_date_epoch_pins_timestamps() {
        // the parser, not the env plumbing: a fixed epoch formats stably
        let t = DateTime::<Utc>::from_timestamp(1_700_000_000, 0).unwrap().to_rfc3339();
        assert_eq!(t, "2023-11-14T22:13:20+00:00");
    }
}
