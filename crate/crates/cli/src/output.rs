//! Writes command artifacts under `<output.dir>/<command>/`.

use std::fs;
use std::path::PathBuf;

use serde::Serialize;
use slowfast_core::export::{json_document, CsvTable, Svg, SCHEMA_VERSION};

use crate::config::{ExperimentConfig, Format};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(slowfast_core::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numeric(_) => "numeric",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Io(m) => m.clone(),
            CliError::Numeric(e) => e.to_string(),
        }
    }
}

impl From<slowfast_core::Error> for CliError {
    fn from(e: slowfast_core::Error) -> Self {
        CliError::Numeric(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub struct Artifacts<'a> {
    pub cfg: &'a ExperimentConfig,
    pub hash: String,
    dir: PathBuf,
    pub written: Vec<PathBuf>,
}

impl<'a> Artifacts<'a> {
    pub fn new(cfg: &'a ExperimentConfig, command: &str) -> CliResult<Self> {
        let dir = cfg.output.dir.join(command);
        fs::create_dir_all(&dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Artifacts { cfg, hash: cfg.hash(), dir, written: Vec::new() })
    }

    fn write(&mut self, name: &str, body: &str) -> CliResult<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(path);
        Ok(())
    }

    pub fn csv(&mut self, name: &str, table: &CsvTable) -> CliResult<()> {
        if !self.cfg.wants(Format::Csv) {
            return Ok(());
        }
        let body = table.render(&[("schema", SCHEMA_VERSION), ("config_hash", &self.hash)]);
        self.write(&format!("{name}.csv"), &body)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, kind: &str, data: &T) -> CliResult<()> {
        if !self.cfg.wants(Format::Json) {
            return Ok(());
        }
        let body = json_document(kind, &self.hash, data).map_err(|e| CliError::Io(e.to_string()))?;
        self.write(&format!("{name}.json"), &body)
    }

    pub fn svg(&mut self, name: &str, title: &str, svg: &Svg) -> CliResult<()> {
        if !self.cfg.wants(Format::Svg) {
            return Ok(());
        }
        let body = svg.render(&format!("{title}; config_hash {}", self.hash));
        self.write(&format!("{name}.svg"), &body)
    }
}

/// File-name friendly rendering of a parameter value.
pub fn tag(v: f64) -> String {
    format!("{v}").replace('-', "m").replace('.', "p")
}
