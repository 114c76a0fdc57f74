//! Trace files: a `t,user1,...,userN` header, then one row per step with
//! the step index (contiguous from 1) and N non-negative demands.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::LoadMatrix;
use crate::error::{Error, Result};

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn reader<R: Read>(input: R) -> ::csv::Reader<R> {
    ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .from_reader(input)
}

fn csv_err(e: ::csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    let message = match e.kind() {
        ::csv::ErrorKind::Utf8 { .. } => "invalid UTF-8".to_string(),
        _ => e.to_string(),
    };
    parse_err(line, message)
}

/// Parses a trace from any reader.
pub fn parse_trace_csv<R: Read>(input: R) -> Result<LoadMatrix> {
    let mut rdr = reader(input);
    let mut records = rdr.records();

    let header = match records.next() {
        None => return Err(parse_err(1, "missing header")),
        Some(r) => r.map_err(csv_err)?,
    };
    let n = header.len().saturating_sub(1);
    if n == 0 || &header[0] != "t" {
        return Err(parse_err(1, "header must be t,user1,...,userN"));
    }
    for (i, name) in header.iter().skip(1).enumerate() {
        if name != format!("user{}", i + 1) {
            return Err(parse_err(
                1,
                format!("header column {} is '{name}', expected 'user{}'", i + 2, i + 1),
            ));
        }
    }

    let mut data = Vec::new();
    let mut expected_t: u64 = 1;
    for rec in records {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != n + 1 {
            return Err(parse_err(
                line,
                format!("expected {} fields, found {}", n + 1, rec.len()),
            ));
        }
        let t: u64 = rec[0]
            .parse()
            .map_err(|_| parse_err(line, format!("step index '{}' is not an integer", &rec[0])))?;
        if t != expected_t {
            return Err(parse_err(
                line,
                format!("step index {t} out of sequence, expected {expected_t}"),
            ));
        }
        expected_t += 1;
        for (i, cell) in rec.iter().skip(1).enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("value '{cell}' for user {} is not a number", i + 1)))?;
            if !v.is_finite() || v < 0.0 {
                return Err(parse_err(
                    line,
                    format!("value {cell} for user {} must be finite and non-negative", i + 1),
                ));
            }
            // fold -0 into 0
            data.push(v + 0.0);
        }
    }
    if data.is_empty() {
        return Err(parse_err(2, "no steps"));
    }
    LoadMatrix::from_flat(n, data)
}

pub fn read_trace_csv(path: &Path) -> Result<LoadMatrix> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_trace_csv(std::io::BufReader::new(file))
}

/// Writes a trace. Values use the shortest representation that reads back exactly.
pub fn write_trace_csv_to<W: Write>(out: W, loads: &LoadMatrix) -> std::io::Result<()> {
    let mut w = ::csv::WriterBuilder::new()
        .quote_style(::csv::QuoteStyle::Never)
        .from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend((1..=loads.n()).map(|i| format!("user{i}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(loads.n() + 1);
    for t in 0..loads.steps() {
        row.clear();
        row.push((t + 1).to_string());
        row.extend(loads.row(t).iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()
}

pub fn write_trace_csv(path: &Path, loads: &LoadMatrix) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    write_trace_csv_to(std::io::BufWriter::new(file), loads).map_err(io)
}
