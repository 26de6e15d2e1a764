use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat};
use clickbounds::report::{csv_line, Cell, Table};
use serde::{Deserialize, Serialize};

use crate::args::{Format, RunConfig};

pub const TOOL: &str = "clickbounds";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Run metadata written ahead of the data. The timestamp is only present
/// when `SOURCE_DATE_EPOCH` is set, so plain reruns are byte-identical.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub config: RunConfig,
}

impl Header {
    pub fn new(config: RunConfig) -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.trim().parse::<i64>().ok())
            .and_then(|secs| DateTime::from_timestamp(secs, 0))
            .map(|t| t.to_rfc3339_opts(SecondsFormat::Secs, true));
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            timestamp,
            config,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedTable {
    pub name: String,
    #[serde(flatten)]
    pub table: Table,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Document {
    pub run: Header,
    pub tables: Vec<NamedTable>,
}

pub fn open(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Writes tables in the configured format. CSV output starts with `#`
/// comment lines holding the header; each table is preceded by
/// `# table: <name>` and separated by a blank line.
pub struct Emitter {
    w: Box<dyn Write>,
    header: Header,
    format: Format,
    tables: Vec<NamedTable>,
    csv_tables: usize,
}

impl Emitter {
    pub fn new(w: Box<dyn Write>, header: Header) -> io::Result<Self> {
        let format = header.config.format;
        let mut e = Self {
            w,
            header,
            format,
            tables: Vec::new(),
            csv_tables: 0,
        };
        if format == Format::Csv {
            writeln!(e.w, "# {} {}", e.header.tool, e.header.version)?;
            if let Some(t) = &e.header.timestamp {
                writeln!(e.w, "# timestamp: {t}")?;
            }
            let cfg = serde_json::to_string(&e.header.config).map_err(io::Error::other)?;
            writeln!(e.w, "# config: {cfg}")?;
        }
        Ok(e)
    }

    fn csv_preamble(&mut self, name: &str, columns: &[String]) -> io::Result<()> {
        if self.csv_tables > 0 {
            writeln!(self.w)?;
        }
        self.csv_tables += 1;
        writeln!(self.w, "# table: {name}")?;
        writeln!(self.w, "{}", columns.join(","))
    }

    pub fn table(&mut self, name: &str, table: Table) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                self.csv_preamble(name, &table.columns)?;
                for row in &table.rows {
                    writeln!(self.w, "{}", csv_line(row))?;
                }
                Ok(())
            }
            Format::Json => {
                self.tables.push(NamedTable {
                    name: name.into(),
                    table,
                });
                Ok(())
            }
        }
    }

    /// Starts a table whose rows arrive one by one through [`Emitter::row`].
    pub fn begin(&mut self, name: &str, columns: &[&str]) -> io::Result<()> {
        let table = Table::new(columns);
        match self.format {
            Format::Csv => self.csv_preamble(name, &table.columns),
            Format::Json => {
                self.tables.push(NamedTable {
                    name: name.into(),
                    table,
                });
                Ok(())
            }
        }
    }

    pub fn row(&mut self, row: Vec<Cell>) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                writeln!(self.w, "{}", csv_line(&row))?;
                self.w.flush()
            }
            Format::Json => {
                self.tables
                    .last_mut()
                    .expect("row before begin")
                    .table
                    .rows
                    .push(row);
                Ok(())
            }
        }
    }

    pub fn finish(mut self) -> io::Result<()> {
        if self.format == Format::Json {
            let doc = Document {
                run: self.header,
                tables: self.tables,
            };
            serde_json::to_writer_pretty(&mut self.w, &doc).map_err(io::Error::other)?;
            writeln!(self.w)?;
        }
        self.w.flush()
    }
}
