//! Artifact emission. Every file is written to a temporary sibling and renamed.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use npeskin::diagnostics::DiagnosticsRecord;
use npeskin::GridFunction;
use serde::Serialize;
use tempfile::NamedTempFile;

use crate::settings::Settings;
use crate::CliError;

pub const DIAGNOSTICS_COLUMNS: [&str; 9] = [
    "t",
    "sup_h",
    "sup_hprime",
    "l2_hprime_sq",
    "hhalf_hprime_sq",
    "h32_norm",
    "M_x",
    "M_y",
    "mean_h",
];

pub struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        std::fs::create_dir_all(root)
            .map_err(|e| CliError::Output(format!("cannot create {}: {e}", root.display())))?;
        let probe = NamedTempFile::new_in(root)
            .map_err(|e| CliError::Output(format!("{} is not writable: {e}", root.display())))?;
        drop(probe);
        Ok(Self { root: root.to_path_buf(), written: Vec::new() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn write(&mut self, relative: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(relative);
        let dir = path.parent().unwrap_or(&self.root);
        std::fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
        let io = |e: std::io::Error| CliError::Output(format!("{}: {e}", path.display()));
        let mut tmp = NamedTempFile::new_in(dir).map_err(io)?;
        tmp.write_all(bytes).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&path).map_err(|e| io(e.error))?;
        self.written.push(PathBuf::from(relative));
        Ok(path)
    }

    pub fn write_csv(&mut self, relative: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| CliError::Output(e.to_string());
        w.write_record(header).map_err(csv_err)?;
        for row in rows {
            w.write_record(row.iter().map(|v| format_float(*v))).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
        self.write(relative, &bytes)
    }
}

/// Shortest round-trip representation, so identical runs give identical bytes.
pub fn format_float(v: f64) -> String {
    format!("{v:e}")
}

pub fn diagnostics_rows<'a>(records: impl Iterator<Item = &'a DiagnosticsRecord>) -> Vec<Vec<f64>> {
    records
        .map(|r| {
            vec![r.t, r.sup_h, r.sup_hprime, r.l2_hprime_sq, r.hhalf_hprime_sq, r.h32_norm, r.m[0], r.m[1], r.mean_h]
        })
        .collect()
}

pub fn snapshot_rows(h: &GridFunction) -> Vec<Vec<f64>> {
    h.nodes().into_iter().zip(h.values()).map(|(s, v)| vec![s, *v]).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct Phase {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: Settings,
    pub phases: Vec<Phase>,
    pub files: Vec<PathBuf>,
    pub checks: Vec<Check>,
    pub status: String,
}

/// Collects phase timings and check verdicts while a command runs.
#[derive(Default)]
pub struct Recorder {
    pub phases: Vec<Phase>,
    pub checks: Vec<Check>,
}

impl Recorder {
    pub fn time<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.phases.push(Phase { name: name.into(), seconds: start.elapsed().as_secs_f64() });
        out
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: String) {
        log::info!("{name}: {} ({detail})", if pass { "pass" } else { "FAIL" });
        self.checks.push(Check { name: name.into(), pass, detail });
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Writes `manifest.json`; it lists every file written before it and itself.
    pub fn finish(self, command: &str, settings: &Settings, out: &mut OutputDir) -> Result<RunManifest, CliError> {
        let status = if self.all_pass() { "pass" } else { "fail" };
        let mut files = out.written().to_vec();
        files.push(PathBuf::from("manifest.json"));
        let manifest = RunManifest {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: settings.clone(),
            phases: self.phases,
            files,
            checks: self.checks,
            status: status.into(),
        };
        let json = serde_json::to_vec_pretty(&manifest).map_err(|e| CliError::Output(e.to_string()))?;
        out.write("manifest.json", &json)?;
        Ok(manifest)
    }
}
