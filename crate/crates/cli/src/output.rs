//! CSV / JSON-lines emitter with a metadata header.

use std::io::{self, Write};

use clap::ValueEnum;
use serde_json::{Map, Value};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub struct Emitter<W: Write> {
    format: Format,
    out: W,
    columns: Vec<String>,
}

impl<W: Write> Emitter<W> {
    pub fn new(format: Format, out: W) -> Self {
        Self {
            format,
            out,
            columns: Vec::new(),
        }
    }

    /// `# parkfn <version> key=value ...`, or a `{"meta": ...}` line.
    pub fn meta(&mut self, command: &str, fields: &[(&str, String)]) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                write!(self.out, "# parkfn {} command={command}", env!("CARGO_PKG_VERSION"))?;
                for (k, v) in fields {
                    write!(self.out, " {k}={v}")?;
                }
                writeln!(self.out)
            }
            Format::Json => {
                let mut meta = Map::new();
                meta.insert("version".into(), env!("CARGO_PKG_VERSION").into());
                meta.insert("command".into(), command.into());
                for (k, v) in fields {
                    meta.insert((*k).into(), v.clone().into());
                }
                let mut line = Map::new();
                line.insert("meta".into(), Value::Object(meta));
                writeln!(self.out, "{}", Value::Object(line))
            }
        }
    }

    /// Sets the column names; prints the header row in CSV mode.
    pub fn columns(&mut self, columns: &[&str]) -> io::Result<()> {
        self.columns = columns.iter().map(|c| c.to_string()).collect();
        match self.format {
            Format::Csv => writeln!(self.out, "{}", columns.join(",")),
            Format::Json => Ok(()),
        }
    }

    pub fn row(&mut self, values: Vec<Value>) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                let cells: Vec<String> = values.iter().map(csv_cell).collect();
                writeln!(self.out, "{}", cells.join(","))
            }
            Format::Json => {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(values).collect();
                writeln!(self.out, "{}", Value::Object(obj))
            }
        }
    }

    /// `# key=value ...` in CSV mode, a `{"footer": ...}` line in JSON mode.
    pub fn footer(&mut self, fields: &[(&str, Value)]) -> io::Result<()> {
        match self.format {
            Format::Csv => {
                let parts: Vec<String> = fields.iter().map(|(k, v)| format!("{k}={}", csv_cell(v))).collect();
                writeln!(self.out, "# {}", parts.join(" "))
            }
            Format::Json => {
                let obj: Map<String, Value> = fields.iter().map(|(k, v)| ((*k).to_string(), v.clone())).collect();
                let mut line = Map::new();
                line.insert("footer".into(), Value::Object(obj));
                writeln!(self.out, "{}", Value::Object(line))
            }
        }
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(csv_cell).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}
