//! Output directory handling: CSV tables, the run report and the config echo.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Writes a CSV file from a header and string rows.
    pub fn csv<I, R>(&self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
        w.write_record(header).map_err(|e| CliError::io(&path, e))?;
        for row in rows {
            w.write_record(row).map_err(|e| CliError::io(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }

    pub fn text(&self, name: &str, body: &str) -> CliResult<()> {
        let path = self.path(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))
    }

    /// Echoes the resolved settings so the run can be repeated with `--config`.
    pub fn echo_config<S: Serialize>(&self, command: &str, settings: &S) -> CliResult<()> {
        let body = toml::to_string(settings)
            .map_err(|e| CliError::usage(format!("serializing config: {e}")))?;
        self.text("config.toml", &format!("# annulus {command}\n{body}"))
    }
}

/// Plain-text run report built line by line.
#[derive(Default)]
pub struct Report {
    body: String,
}

impl Report {
    pub fn new(title: &str) -> Self {
        let mut r = Self::default();
        r.line(title);
        r.line(&"=".repeat(title.len()));
        r
    }

    pub fn line(&mut self, s: &str) {
        self.body.push_str(s);
        self.body.push('\n');
    }

    pub fn field(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.body, "{key:<28}{value}");
    }

    pub fn warn(&mut self, s: &str) {
        log::warn!("{s}");
        let _ = writeln!(self.body, "WARNING: {s}");
    }

    pub fn finish(self) -> String {
        self.body
    }
}

/// Shortest round-trip formatting; infinities as `inf`, NaN as an empty cell.
pub fn num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        v.to_string()
    }
}

pub fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, num)
}
