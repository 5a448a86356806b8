//! Text formats for signals, dense matrices and result tables.
//!
//! Numbers are written with Rust's shortest round-trip formatting, so every
//! file parses back to the exact values and repeated runs are byte-identical.
//!
//! * Signal: `# n=<len> sample_rate=<r|none>`, then one `re,im` line per sample.
//! * Matrix: `# rows=<r> cols=<c> complex=1`, then one line per row holding
//!   `re,im` pairs for each entry in adjacent columns.
//! * Table: a single `# col1,col2,...` header, then comma-separated rows.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linop::C64;
use crate::signals::Signal;

/// Shortest text that parses back to `v`, switching to exponent form for
/// very large or small magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn header_fields<'a>(line: Option<&'a str>, what: &str) -> Result<Vec<(&'a str, &'a str)>> {
    let line = line.ok_or_else(|| Error::Parse(format!("empty {what} file")))?;
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse(format!("{what} header must start with '#', got {line:?}")))?;
    body.split_whitespace()
        .map(|kv| kv.split_once('=').ok_or_else(|| Error::Parse(format!("malformed header field {kv:?}"))))
        .collect()
}

fn field<'a>(fields: &[(&str, &'a str)], key: &str) -> Result<&'a str> {
    fields
        .iter()
        .find(|(k, _)| *k == key)
        .map(|(_, v)| *v)
        .ok_or_else(|| Error::Parse(format!("header is missing {key}")))
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("cannot parse {what} from {s:?}")))
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().skip(1).filter(|(_, l)| !l.trim().is_empty()).map(|(i, l)| (i + 1, l))
}

pub fn signal_to_csv(signal: &Signal) -> String {
    let rate = signal.sample_rate.map_or_else(|| "none".to_string(), num);
    let mut out = format!("# n={} sample_rate={}\n", signal.len(), rate);
    for v in &signal.samples {
        let _ = writeln!(out, "{},{}", num(v.re), num(v.im));
    }
    out
}

pub fn signal_from_csv(text: &str) -> Result<Signal> {
    let fields = header_fields(text.lines().next(), "signal")?;
    let n: usize = parse_num(field(&fields, "n")?, "n")?;
    let sample_rate = match field(&fields, "sample_rate")? {
        "none" => None,
        r => Some(parse_num(r, "sample_rate")?),
    };
    let samples: Vec<C64> = data_lines(text)
        .map(|(line_no, line)| {
            let (re, im) = line.split_once(',').unwrap_or((line, "0"));
            Ok(C64::new(parse_num(re, &format!("line {line_no}"))?, parse_num(im, &format!("line {line_no}"))?))
        })
        .collect::<Result<_>>()?;
    if samples.len() != n {
        return Err(Error::Parse(format!("header declares n={n} but the file holds {} samples", samples.len())));
    }
    Ok(Signal { samples, sample_rate, label: String::new() })
}

pub fn matrix_to_csv(m: &DMatrix<C64>) -> String {
    let mut out = format!("# rows={} cols={} complex=1\n", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = m.row(r).iter().map(|v| format!("{},{}", num(v.re), num(v.im))).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<DMatrix<C64>> {
    let fields = header_fields(text.lines().next(), "matrix")?;
    let rows: usize = parse_num(field(&fields, "rows")?, "rows")?;
    let cols: usize = parse_num(field(&fields, "cols")?, "cols")?;
    let complex = fields.iter().find(|(k, _)| *k == "complex").is_none_or(|(_, v)| *v == "1");
    let per_entry = if complex { 2 } else { 1 };
    let mut entries = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for (line_no, line) in data_lines(text) {
        let values: Vec<f64> =
            line.split(',').map(|t| parse_num(t, &format!("line {line_no}"))).collect::<Result<_>>()?;
        if values.len() != cols * per_entry {
            return Err(Error::Parse(format!(
                "line {line_no} holds {} values, expected {}",
                values.len(),
                cols * per_entry
            )));
        }
        entries.extend(values.chunks(per_entry).map(|c| C64::new(c[0], if complex { c[1] } else { 0.0 })));
        seen_rows += 1;
    }
    if seen_rows != rows {
        return Err(Error::Parse(format!("header declares rows={rows} but the file holds {seen_rows}")));
    }
    Ok(DMatrix::from_row_slice(rows, cols, &entries))
}

/// A table with a `#`-prefixed header line.
pub fn table_to_csv<S: AsRef<str>>(header: &[S], rows: &[Vec<f64>]) -> String {
    let mut out = String::from("# ");
    out.push_str(&header.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|&v| num(v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

pub fn table_from_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let first = text.lines().next().ok_or_else(|| Error::Parse("empty table".into()))?;
    let header = first
        .strip_prefix("# ")
        .ok_or_else(|| Error::Parse(format!("table header must start with '# ', got {first:?}")))?;
    let header: Vec<String> = header.split(',').map(str::to_string).collect();
    let rows = data_lines(text)
        .map(|(line_no, line)| line.split(',').map(|t| parse_num(t, &format!("line {line_no}"))).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    Ok((header, rows))
}

pub fn read_signal(path: &Path) -> Result<Signal> {
    signal_from_csv(&fs::read_to_string(path)?)
}

pub fn write_signal(path: &Path, signal: &Signal) -> Result<()> {
    Ok(fs::write(path, signal_to_csv(signal))?)
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<C64>> {
    matrix_from_csv(&fs::read_to_string(path)?)
}

pub fn write_matrix(path: &Path, m: &DMatrix<C64>) -> Result<()> {
    Ok(fs::write(path, matrix_to_csv(m))?)
}
