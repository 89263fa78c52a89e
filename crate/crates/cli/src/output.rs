//! File writers. Data files are deterministic; anything that varies between
//! runs (timestamps, argv) goes in the `.meta.json` sidecar.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::error::CliError;

pub struct OutputDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root)?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush()?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(std::io::Error::other)?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        fs::write(self.path(name), text)?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Writes `<stem>.meta.json` listing everything written so far.
    pub fn finish(self, stem: &str, argv: &[String]) -> Result<Vec<String>, CliError> {
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let meta = serde_json::json!({
            "command": stem,
            "argv": argv,
            "version": env!("CARGO_PKG_VERSION"),
            "created_unix_seconds": created,
            "files": self.written,
        });
        let text = serde_json::to_string_pretty(&meta).map_err(std::io::Error::other)?;
        fs::write(self.root.join(format!("{stem}.meta.json")), text + "\n")?;
        Ok(self.written)
    }
}

/// Shortest round-trip rendering; infinities as `inf`.
pub fn num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}
