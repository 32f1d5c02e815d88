//! CSV dialects: comma-separated, `.` decimal, mandatory header, UTF-8.

use std::path::Path;

use num_complex::Complex64;

use crate::analysis::{TimeTrace, TraceData};
use crate::error::{Error, Result};
use crate::model::GainTable;
use crate::waveguide::FieldProfile;

/// Relative jitter allowed on an explicit time column.
pub const TIME_JITTER_TOL: f64 = 1e-6;

fn reader(path: &Path) -> Result<::csv::Reader<std::fs::File>> {
    ::csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(::csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: ::csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        ::csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Csv { line, message: format!("{other:?}") },
    }
}

fn column(headers: &::csv::StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
}

/// Reads numeric columns by header name; every row must parse.
fn read_columns(path: &Path, names: &[&str]) -> Result<(Vec<Vec<f64>>, Vec<bool>)> {
    let mut rdr = reader(path)?;
    let headers = rdr.headers().map_err(|e| csv_error(path, e))?.clone();
    let idx: Vec<Option<usize>> = names.iter().map(|n| column(&headers, n)).collect();
    let mut cols = vec![Vec::new(); names.len()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        for (k, i) in idx.iter().enumerate() {
            if let Some(i) = *i {
                let field = rec.get(i).ok_or_else(|| Error::Csv { line, message: format!("missing '{}' field", names[k]) })?;
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::Csv { line, message: format!("'{field}' is not a number") })?;
                if !v.is_finite() {
                    return Err(Error::Csv { line, message: format!("non-finite value in '{}'", names[k]) });
                }
                cols[k].push(v);
            }
        }
    }
    Ok((cols, idx.iter().map(Option::is_some).collect()))
}

/// Loads a measured homodyne record with columns `i,q` or `t,i,q`.
///
/// An explicit `t` column overrides `dt` and `t0`.
pub fn import_iq_csv(path: &Path, dt: f64, t0: f64) -> Result<TimeTrace> {
    let (cols, present) = read_columns(path, &["t", "i", "q"])?;
    for (k, name) in [(1, "i"), (2, "q")] {
        if !present[k] {
            return Err(Error::Csv { line: 1, message: format!("missing required column '{name}'") });
        }
    }
    let samples: Vec<Complex64> = cols[1].iter().zip(&cols[2]).map(|(&i, &q)| Complex64::new(i, q)).collect();
    if samples.is_empty() {
        return Err(Error::Csv { line: 2, message: "no data rows".into() });
    }
    let (t0, dt) = if present[0] { uniform_grid(&cols[0])? } else { (t0, dt) };
    TimeTrace::new(t0, dt, TraceData::Iq(samples))
}

/// (t0, dt) of an explicit time column, rejecting jitter beyond tolerance.
fn uniform_grid(t: &[f64]) -> Result<(f64, f64)> {
    if t.len() < 2 {
        return Err(Error::Csv { line: 2, message: "a time column needs at least two rows".into() });
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if !(dt > 0.0) {
        return Err(Error::Csv { line: 2, message: "time column must increase".into() });
    }
    for (k, &tk) in t.iter().enumerate() {
        let want = t[0] + k as f64 * dt;
        if (tk - want).abs() > TIME_JITTER_TOL * dt {
            return Err(Error::Csv { line: k as u64 + 2, message: format!("non-uniform timestamp {tk}") });
        }
    }
    Ok((t[0], dt))
}

/// Writes `t,i,q` with round-trip float formatting.
pub fn write_iq_csv(trace: &TimeTrace, path: &Path) -> Result<()> {
    let TraceData::Iq(s) = &trace.data else {
        return Err(Error::WrongTraceKind { expected: "iq", found: trace.data.kind_name() });
    };
    let mut w = ::csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["t", "i", "q"]).map_err(|e| csv_error(path, e))?;
    for (k, z) in s.iter().enumerate() {
        w.write_record([trace.time(k).to_string(), z.re.to_string(), z.im.to_string()])
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads `freq_hz,field` as a field profile flattened to `target`.
pub fn read_field_profile(path: &Path, target: f64) -> Result<FieldProfile> {
    let (mut cols, present) = read_columns(path, &["freq_hz", "field"])?;
    if present.iter().any(|p| !p) {
        return Err(Error::Csv { line: 1, message: "expected columns 'freq_hz,field'".into() });
    }
    let field = cols.pop().unwrap();
    let freq = cols.pop().unwrap();
    FieldProfile::new(freq, field, target)
}

pub fn read_gain_table(path: &Path) -> Result<GainTable> {
    let (mut cols, present) = read_columns(path, &["freq_hz", "gain"])?;
    if present.iter().any(|p| !p) {
        return Err(Error::Csv { line: 1, message: "expected columns 'freq_hz,gain'".into() });
    }
    let gain = cols.pop().unwrap();
    let freq = cols.pop().unwrap();
    GainTable::new(freq, gain)
}

pub fn write_gain_table(table: &GainTable, path: &Path) -> Result<()> {
    let mut w = ::csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["freq_hz", "gain"]).map_err(|e| csv_error(path, e))?;
    for (f, g) in table.freq_hz.iter().zip(&table.gain) {
        w.write_record([f.to_string(), g.to_string()]).map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
