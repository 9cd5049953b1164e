use std::io::Write;

use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::CliError;

/// 17 significant digits, round-trip safe.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// A table with named columns that renders to CSV or to a JSON array of objects.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    Int(usize),
    Real(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Real(x) => num(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Int(i) => (*i).into(),
            // non-finite values have no JSON number form
            Cell::Real(x) if x.is_finite() => (*x).into(),
            Cell::Real(x) => num(*x).into(),
            Cell::Text(s) => s.clone().into(),
        }
    }
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(io_err)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render)).map_err(io_err)?;
        }
        w.into_inner().map_err(|e| CliError::Io(e.to_string()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        self.rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<_, _> =
                    self.header.iter().zip(r).map(|(h, c)| (h.to_string(), c.json())).collect();
                serde_json::Value::Object(obj)
            })
            .collect()
    }
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

/// What a subcommand produced.
pub enum Report {
    Table(Table),
    /// A single JSON document.
    Json(serde_json::Value),
}

fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cfg.output.path {
        Some(p) => Box::new(std::fs::File::create(p).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?),
        None => Box::new(std::io::stdout().lock()),
    })
}

/// Writes the report: CSV gets a `# config:` comment line, JSON files get a `config` field.
pub fn emit(cfg: &RunConfig, report: Report, default: Format) -> Result<(), CliError> {
    let format = cfg.output.format.unwrap_or(default);
    let to_file = cfg.output.path.is_some();
    let mut out = sink(cfg)?;
    match (format, report) {
        (Format::Csv, Report::Table(t)) => {
            writeln!(out, "# config: {}", cfg.to_json_line()).map_err(io_err)?;
            out.write_all(&t.to_csv()?).map_err(io_err)?;
        }
        (Format::Csv, Report::Json(_)) => {
            return Err(CliError::Validation("this command has no CSV form".into()));
        }
        (Format::Json, report) => {
            let body = match report {
                Report::Table(t) => t.to_json(),
                Report::Json(v) => v,
            };
            let doc = if to_file {
                serde_json::json!({ "config": cfg, "result": body })
            } else {
                body
            };
            let text = serde_json::to_string_pretty(&doc).map_err(io_err)?;
            writeln!(out, "{text}").map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

pub fn json<T: Serialize>(x: &T) -> serde_json::Value {
    serde_json::to_value(x).expect("serializable")
}
