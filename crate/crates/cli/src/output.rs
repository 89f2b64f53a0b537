//! Versioned CSV and plain-text sinks.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::doc::Axis;
use crate::error::CliError;

pub const CSV_VERSION: &str = "v1";

fn open_target(path: Option<&PathBuf>) -> Result<(Box<dyn Write>, String), CliError> {
    match path {
        Some(p) if p.as_path() != Path::new("-") => {
            let shown = p.display().to_string();
            let f = File::create(p).map_err(|e| CliError::input("out", format!("cannot create {shown}: {e}")))?;
            Ok((Box::new(BufWriter::new(f)), shown))
        }
        _ => Ok((Box::new(io::stdout().lock()), "stdout".into())),
    }
}

fn io_err(target: &str, e: impl std::fmt::Display) -> CliError {
    CliError::input("out", format!("writing {target}: {e}"))
}

/// CSV table held in memory until every point has evaluated, so a failing
/// sweep leaves no partial file behind.
pub struct CsvSink {
    path: Option<PathBuf>,
    writer: csv::Writer<Vec<u8>>,
}

impl CsvSink {
    /// Start a table with its `# tierline-csv v1 <subject>` line and header.
    pub fn open(path: Option<&PathBuf>, subject: &str, header: &[String]) -> Result<Self, CliError> {
        let mut buf = Vec::new();
        writeln!(buf, "# tierline-csv {CSV_VERSION} {subject}").expect("in-memory write");
        let mut writer = csv::Writer::from_writer(buf);
        writer.write_record(header).map_err(|e| io_err("csv", e))?;
        Ok(Self {
            path: path.cloned(),
            writer,
        })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<(), CliError> {
        self.writer.write_record(cells).map_err(|e| io_err("csv", e))
    }

    pub fn finish(self) -> Result<(), CliError> {
        let bytes = self.writer.into_inner().map_err(|e| io_err("csv", e))?;
        let (mut w, target) = open_target(self.path.as_ref())?;
        match w.write_all(&bytes).and_then(|_| w.flush()) {
            Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
            r => r.map_err(|e| io_err(&target, e)),
        }
    }
}

pub struct TextSink {
    w: Box<dyn Write>,
    target: String,
}

impl TextSink {
    pub fn open(path: &PathBuf) -> Result<Self, CliError> {
        let (w, target) = open_target(Some(path))?;
        Ok(Self { w, target })
    }

    pub fn point(&mut self, index: usize, coords: &[Value], axes: &[Axis], body: &str) -> Result<(), CliError> {
        if !axes.is_empty() {
            let at: Vec<String> = axes.iter().zip(coords).map(|(a, v)| format!("{}={v}", a.path)).collect();
            writeln!(self.w, "== point {index}: {}", at.join(" ")).map_err(|e| io_err(&self.target, e))?;
        }
        write!(self.w, "{body}").map_err(|e| io_err(&self.target, e))
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.w.flush().map_err(|e| io_err(&self.target, e))
    }
}
