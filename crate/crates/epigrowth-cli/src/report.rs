//! Output plumbing shared by the subcommands: CSV tables and the flat
//! key=value summary files that carry the gate verdicts.

use std::fmt::Display;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use epigrowth::io::write_csv_row;
use epigrowth::studies::Gate;

/// Shortest round-trip decimal for a float; stable for identical bits, so
/// reruns with the same seed produce byte-identical tables.
pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    );
    write_csv_row(&mut w, header)?;
    for row in rows {
        write_csv_row(&mut w, row)?;
    }
    w.flush()?;
    Ok(())
}

pub struct Summary {
    lines: Vec<(String, String)>,
}

impl Summary {
    pub fn new(study: &str) -> Summary {
        Summary {
            lines: vec![("study".into(), study.into())],
        }
    }

    pub fn put(&mut self, key: impl Into<String>, value: impl Display) {
        self.lines.push((key.into(), value.to_string()));
    }

    /// Record each gate verdict; returns whether every gate passed.
    pub fn gates(&mut self, gates: &[Gate]) -> bool {
        let mut all = true;
        for g in gates {
            self.put(format!("gate.{}", g.name), if g.pass { "pass" } else { "FAIL" });
            self.put(format!("gate.{}.detail", g.name), &g.detail);
            all &= g.pass;
        }
        self.put("gates_passed", all);
        all
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = String::new();
        for (k, v) in &self.lines {
            text.push_str(&format!("{k} = {v}\n"));
        }
        std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}
