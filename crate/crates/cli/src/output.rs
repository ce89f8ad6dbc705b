//! Buffered outputs and run manifests.
//!
//! Results are assembled in memory and written only once the whole command
//! has succeeded, so a failing run leaves no partial files behind. If a write
//! fails midway, the files already written by this run are removed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct RunManifest<'a, P: Serialize> {
    pub subcommand: &'a str,
    pub params: &'a P,
    pub master_seed: Option<u64>,
    pub code_version: &'static str,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

pub struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
    stdout: Vec<u8>,
    started: Instant,
}

impl Outputs {
    pub fn new() -> Self {
        Outputs {
            files: Vec::new(),
            stdout: Vec::new(),
            started: Instant::now(),
        }
    }

    /// Sends `bytes` to `path`, or to standard output when `path` is `None`.
    pub fn emit(&mut self, path: Option<&Path>, bytes: Vec<u8>) {
        match path {
            Some(p) => self.files.push((p.to_path_buf(), bytes)),
            None => self.stdout.extend(bytes),
        }
    }

    /// Writes everything. When at least one file is produced, a manifest
    /// `<first file>.manifest.json` accompanies the outputs.
    pub fn commit<P: Serialize>(
        mut self,
        subcommand: &str,
        params: &P,
        master_seed: Option<u64>,
    ) -> Result<(), CliError> {
        if let Some((first, _)) = self.files.first() {
            let manifest_path = manifest_path(first);
            let manifest = RunManifest {
                subcommand,
                params,
                master_seed,
                code_version: env!("CARGO_PKG_VERSION"),
                outputs: self.files.iter().map(|(p, _)| p.display().to_string()).collect(),
                wall_time_s: self.started.elapsed().as_secs_f64(),
            };
            let mut bytes = serde_json::to_vec_pretty(&manifest)?;
            bytes.push(b'\n');
            self.files.push((manifest_path, bytes));
        }
        let mut written: Vec<&Path> = Vec::new();
        for (path, bytes) in &self.files {
            if let Err(e) = fs::write(path, bytes) {
                for p in written {
                    let _ = fs::remove_file(p);
                }
                return Err(CliError::Io(format!("{}: {e}", path.display())));
            }
            written.push(path);
        }
        std::io::stdout()
            .write_all(&self.stdout)
            .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
        Ok(())
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Serialises rows with a header line.
pub fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Io(format!("csv buffer: {e}")))
}

pub fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}
