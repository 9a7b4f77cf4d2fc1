//! Output files: CSV tables with pinned column layouts, and JSON documents.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Bumped whenever a column is added, removed, renamed or reordered.
pub const SCHEMA_VERSION: u32 = 1;

pub const REDUCED_COLUMNS: [&str; 3] = ["tau", "rho", "psi"];
pub const OSCILLATOR_COLUMNS: [&str; 5] = ["t", "u", "v", "E", "Delta"];
pub const RESIDUAL_COLUMNS: [&str; 5] = ["tau", "rho", "psi", "residual_rho", "residual_psi"];
pub const BASIN_COLUMNS: [&str; 6] = ["index", "rho0", "psi0", "status", "rho_final", "psi_final"];
pub const CROSSCHECK_COLUMNS: [&str; 7] = ["t", "tau", "envelope", "predicted", "rel_error", "delta", "psi"];

/// Files written by one run, named relative to the output directory.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    stem: String,
    files: Vec<String>,
}

impl OutputSet {
    pub fn new(dir: &Path, stem: &str) -> CliResult<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(OutputSet {
            dir: dir.to_path_buf(),
            stem: stem.to_string(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn stem(&self) -> &str {
        &self.stem
    }

    /// `<stem>.<suffix>`, registered as an output.
    fn claim(&mut self, suffix: &str) -> (String, PathBuf) {
        let name = format!("{}.{suffix}", self.stem);
        let path = self.dir.join(&name);
        if !self.files.contains(&name) {
            self.files.push(name.clone());
        }
        (name, path)
    }

    pub fn csv<R, I>(&mut self, suffix: &str, header: &[&str], rows: I) -> CliResult<PathBuf>
    where
        R: Serialize,
        I: IntoIterator<Item = R>,
    {
        let (_, path) = self.claim(suffix);
        let to_err = |e: csv::Error| CliError::io(&path, e.into());
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_path(&path)
            .map_err(to_err)?;
        w.write_record(header).map_err(to_err)?;
        for row in rows {
            w.serialize(row).map_err(to_err)?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, suffix: &str, value: &T) -> CliResult<PathBuf> {
        let (_, path) = self.claim(suffix);
        write_json(&path, value)?;
        Ok(path)
    }

    pub fn into_files(self) -> Vec<String> {
        self.files
    }
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e.into()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}
