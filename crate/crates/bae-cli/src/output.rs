//! Output files. Each CSV opens with comment lines naming the convention, the tool version and
//! the resolved configuration, and gets a JSON sidecar; JSON reports carry the same provenance.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const CONVENTION: &str =
    "single-sided PSD, rotating frame, angular frequency, force-referred spectra in units of the solver inputs";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Envelope<'c, 'r, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    convention: &'static str,
    config: &'c RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    columns: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<&'r T>,
}

pub struct OutputDir<'a> {
    dir: PathBuf,
    config: &'a RunConfig,
    written: Vec<PathBuf>,
}

impl<'a> OutputDir<'a> {
    pub fn create(dir: &Path, config: &'a RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
        Ok(Self { dir: dir.to_path_buf(), config, written: Vec::new() })
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn envelope<'r, T: Serialize>(&self, columns: Option<Vec<String>>, report: Option<&'r T>) -> Envelope<'a, 'r, T> {
        Envelope {
            tool: "bae",
            version: VERSION,
            convention: CONVENTION,
            config: self.config,
            columns,
            report,
        }
    }

    fn json_string<T: Serialize>(&self, path: &Path, value: &T) -> Result<String, CliError> {
        serde_json::to_string_pretty(value).map_err(|e| CliError::Encode { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|source| CliError::Write { path: path.clone(), source })?;
        self.written.push(path);
        Ok(())
    }

    /// Writes `<stem>.json` holding the provenance and `report`.
    pub fn write_report<T: Serialize>(&mut self, stem: &str, report: &T) -> Result<(), CliError> {
        let name = format!("{stem}.json");
        let text = self.json_string(&self.dir.join(&name), &self.envelope(None, Some(report)))?;
        self.write_text(&name, &(text + "\n"))
    }

    /// Writes `<stem>.csv` and its sidecar `<stem>.json`.
    pub fn write_table<R: Serialize>(&mut self, stem: &str, columns: &[&str], rows: &[R]) -> Result<(), CliError> {
        let path = self.dir.join(format!("{stem}.csv"));
        let io_err = |source| CliError::Write { path: path.clone(), source };
        let mut file = BufWriter::new(File::create(&path).map_err(io_err)?);
        let config = serde_json::to_string(self.config)
            .map_err(|e| CliError::Encode { path: path.clone(), message: e.to_string() })?;
        writeln!(file, "# bae {VERSION}; {CONVENTION}").map_err(io_err)?;
        writeln!(file, "# config: {config}").map_err(io_err)?;
        {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(&mut file);
            w.write_record(columns)
                .and_then(|_| rows.iter().try_for_each(|r| w.serialize(r)))
                .and_then(|_| w.flush().map_err(csv::Error::from))
                .map_err(|e| CliError::Encode { path: path.clone(), message: e.to_string() })?;
        }
        file.flush().map_err(io_err)?;
        self.written.push(path);

        let sidecar = format!("{stem}.json");
        let envelope = self.envelope::<()>(Some(columns.iter().map(|c| c.to_string()).collect()), None);
        let text = self.json_string(&self.dir.join(&sidecar), &envelope)?;
        self.write_text(&sidecar, &(text + "\n"))
    }
}

/// Formats a possibly infinite quantity for a table cell.
pub fn bounded(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        "unbounded".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Row {
        a: f64,
        b: String,
    }

    #[test]
    fn table_has_header_comments_and_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig::default();
        let mut out = OutputDir::create(dir.path(), &cfg).unwrap();
        out.write_table("t", &["a", "b"], &[Row { a: 1.5, b: bounded(f64::INFINITY) }]).unwrap();
        let text = fs::read_to_string(dir.path().join("t.csv")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# bae") && lines[0].contains("single-sided"));
        assert!(lines[1].starts_with("# config: {"));
        assert_eq!(lines[2], "a,b");
        assert_eq!(lines[3], "1.5,unbounded");
        let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
        assert_eq!(side["columns"][1], "b");
        assert_eq!(side["config"]["schema_version"], 1);
        assert_eq!(out.written().len(), 2);
    }
}
