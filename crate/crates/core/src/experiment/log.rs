//! CSV form of the result log.
//!
//! Columns are `population_no,query_no,doc_id,g_raw,g,p_raw,p,s_raw,s`.
//! Floats are written in shortest round-trip form, so reading a written log
//! gives back the same records bit for bit.
//!
//! The reader is more lenient than the writer: it accepts comma, semicolon
//! or tab delimiters, decimal commas, skips `...` elision lines, and accepts
//! an eight-column table without `doc_id` (population, query, g(r,R), g,
//! p(r,R), p, s(r,R), s), naming its rows `r1`, `r2`, ... A named header
//! without `doc_id` gets the same synthesized ids.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitness::ResultRecord;

use super::config::ExperimentConfig;

pub const LOG_HEADER: [&str; 9] = [
    "population_no",
    "query_no",
    "doc_id",
    "g_raw",
    "g",
    "p_raw",
    "p",
    "s_raw",
    "s",
];

const TABLE_COLUMNS: [&str; 8] = [
    "population_no",
    "query_no",
    "g_raw",
    "g",
    "p_raw",
    "p",
    "s_raw",
    "s",
];

/// What one generation looked like, kept for audits of elitism and
/// fitness bookkeeping.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationAudit {
    pub population_no: u64,
    /// Terms of each query, in query order.
    pub queries: Vec<Vec<String>>,
    /// Ranked document ids returned by each query, after caps.
    pub results: Vec<Vec<String>>,
    pub query_fitness: Vec<f64>,
    pub population_fitness: f64,
    /// Offspring bred from this population; empty for the last one.
    #[serde(default)]
    pub offspring: Vec<Vec<String>>,
    /// Fitness of parents then offspring, evaluated together, that decided
    /// which genomes survive.
    #[serde(default)]
    pub pool_fitness: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub generations: Vec<GenerationAudit>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultLog {
    pub records: Vec<ResultRecord>,
    pub meta: Option<RunMetadata>,
}

impl ResultLog {
    pub fn from_records(records: Vec<ResultRecord>) -> Self {
        Self {
            records,
            meta: None,
        }
    }

    /// Distinct population numbers in ascending order.
    pub fn populations(&self) -> Vec<u64> {
        let mut p: Vec<u64> = self.records.iter().map(|r| r.population_no).collect();
        p.sort_unstable();
        p.dedup();
        p
    }
}

pub fn write_records<W: Write>(records: &[ResultRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LOG_HEADER)?;
    for r in records {
        w.write_record([
            r.population_no.to_string(),
            r.query_no.to_string(),
            r.doc_id.clone(),
            r.g_raw.to_string(),
            r.g.to_string(),
            r.p_raw.to_string(),
            r.p.to_string(),
            r.s_raw.to_string(),
            r.s.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_log(log: &ResultLog, path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_records(&log.records, std::io::BufWriter::new(file))
}

pub fn write_metadata(meta: &RunMetadata, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(meta)?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub fn read_metadata(path: &Path) -> Result<RunMetadata> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn read_log(path: &Path) -> Result<ResultLog> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_log(&text)
}

fn is_elision(line: &str) -> bool {
    let t = line.trim();
    !t.is_empty() && t.chars().all(|c| c == '.' || c == '…')
}

fn split_line(line: &str, delimiter: u8) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .has_headers(false)
        .flexible(true)
        .from_reader(line.as_bytes());
    let mut record = csv::StringRecord::new();
    rdr.read_record(&mut record)?;
    Ok(record.iter().map(|f| f.trim().to_string()).collect())
}

/// Column index for each of [`LOG_HEADER`]; `doc_id` may be absent.
type Layout = [Option<usize>; 9];

fn layout(header: &[String], line: usize) -> Result<Layout> {
    let mut idx = [None; 9];
    if header.iter().any(|h| h == "population_no") {
        for (k, name) in LOG_HEADER.iter().enumerate() {
            idx[k] = header.iter().position(|h| h == name);
            if idx[k].is_none() && *name != "doc_id" {
                return Err(Error::Log {
                    line,
                    column: name.to_string(),
                    message: "missing column in header".into(),
                });
            }
        }
        Ok(idx)
    } else if header.len() == TABLE_COLUMNS.len() {
        for (k, name) in LOG_HEADER.iter().enumerate() {
            idx[k] = TABLE_COLUMNS.iter().position(|n| n == name);
        }
        Ok(idx)
    } else {
        Err(Error::Log {
            line,
            column: "header".into(),
            message: format!("unrecognized header with {} columns", header.len()),
        })
    }
}

pub fn parse_log(text: &str) -> Result<ResultLog> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_start_matches('\u{feff}')))
        .filter(|(_, l)| !l.trim().is_empty() && !is_elision(l));

    let Some((header_line, header_text)) = lines.next() else {
        return Ok(ResultLog::default());
    };
    let delimiter = if header_text.contains('\t') {
        b'\t'
    } else if header_text.contains(';') {
        b';'
    } else {
        b','
    };
    let header = split_line(header_text, delimiter)?;
    let layout = layout(&header, header_line)?;

    let mut records = Vec::new();
    for (line, raw) in lines {
        let fields = split_line(raw, delimiter)?;
        let expected = header.len();
        if fields.len() != expected {
            return Err(Error::Log {
                line,
                column: "row".into(),
                message: format!("expected {expected} fields, found {}", fields.len()),
            });
        }
        let get = |name: &str| -> &str {
            let k = LOG_HEADER.iter().position(|n| *n == name).unwrap();
            layout[k].map_or("", |i| fields[i].as_str())
        };
        let err = |column: &str, message: String| Error::Log {
            line,
            column: column.to_string(),
            message,
        };
        let int = |name: &str| -> Result<u64> {
            get(name)
                .parse()
                .map_err(|_| err(name, format!("not a non-negative integer: {:?}", get(name))))
        };
        let real = |name: &str| -> Result<f64> {
            let v: f64 = get(name)
                .replace(',', ".")
                .parse()
                .map_err(|_| err(name, format!("not a number: {:?}", get(name))))?;
            if !v.is_finite() {
                return Err(err(name, "not finite".into()));
            }
            Ok(v)
        };
        let unit = |name: &str| -> Result<f64> {
            let v = real(name)?;
            if !(0.0..=1.0).contains(&v) {
                return Err(err(name, format!("{v} outside [0, 1]")));
            }
            Ok(v)
        };
        let nonneg = |name: &str| -> Result<f64> {
            let v = real(name)?;
            if v < 0.0 {
                return Err(err(name, format!("{v} is negative")));
            }
            Ok(v)
        };

        let doc_id = if layout[2].is_some() {
            let id = get("doc_id");
            if id.is_empty() {
                return Err(err("doc_id", "empty document id".into()));
            }
            id.to_string()
        } else {
            format!("r{}", records.len() + 1)
        };
        records.push(ResultRecord {
            population_no: int("population_no")?,
            query_no: int("query_no")?,
            doc_id,
            g_raw: nonneg("g_raw")?,
            g: unit("g")?,
            p_raw: nonneg("p_raw")?,
            p: unit("p")?,
            s_raw: unit("s_raw")?,
            s: real("s")?,
        });
    }
    Ok(ResultLog::from_records(records))
}
