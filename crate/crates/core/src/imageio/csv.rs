//! Diagnostics and stability-map tables.
//!
//! Floats are written in the shortest form that parses back to the same
//! value; stability cells without a stable ε hold `NA`.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::analysis::{DiagRecord, RunDiagnostics, StabilityMap};
use crate::error::{Error, Result};

use super::fmt_f64;

pub const DIAG_HEADER: [&str; 6] = ["iter", "time", "sup_norm", "mean", "tv_energy", "increment"];
pub const STABILITY_HEADER: [&str; 3] = ["theta", "dt", "eps_min"];
const NA: &str = "NA";

fn csv_err(e: csv::Error) -> Error {
    let offset = e.position().map_or(0, |p| p.byte() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Format {
            offset,
            reason: format!("{kind:?}"),
        },
    }
}

fn write_table<W: Write>(
    out: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    for r in rows {
        w.write_record(&r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of a table whose header must equal `header`, with the byte offset of each row.
fn read_table<R: Read>(input: R, header: &[&str]) -> Result<Vec<(usize, csv::StringRecord)>> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(input);
    let mut rows = r.records();
    let first = match rows.next() {
        Some(rec) => rec.map_err(csv_err)?,
        None => {
            return Err(Error::Format {
                offset: 0,
                reason: "missing header".into(),
            })
        }
    };
    if first.iter().ne(header.iter().copied()) {
        return Err(Error::Format {
            offset: 0,
            reason: format!("header must be `{}`", header.join(",")),
        });
    }
    rows.map(|rec| {
        let rec = rec.map_err(csv_err)?;
        let at = rec.position().map_or(0, |p| p.byte() as usize);
        if rec.len() != header.len() {
            return Err(Error::Format {
                offset: at,
                reason: format!("expected {} fields, found {}", header.len(), rec.len()),
            });
        }
        Ok((at, rec))
    })
    .collect()
}

fn field<T: std::str::FromStr>(
    rec: &csv::StringRecord,
    k: usize,
    at: usize,
    name: &str,
) -> Result<T> {
    rec[k].parse().map_err(|_| Error::Format {
        offset: at,
        reason: format!("bad `{name}` value `{}`", &rec[k]),
    })
}

pub fn write_diagnostics<W: Write>(out: W, run: &RunDiagnostics) -> Result<()> {
    let rows = run.records.iter().map(|r| {
        vec![
            r.iter.to_string(),
            fmt_f64(r.time),
            fmt_f64(r.sup_norm),
            fmt_f64(r.mean),
            fmt_f64(r.tv_energy),
            fmt_f64(r.increment),
        ]
    });
    write_table(out, &DIAG_HEADER, rows)
}

pub fn write_diagnostics_csv(path: impl AsRef<Path>, run: &RunDiagnostics) -> Result<()> {
    write_diagnostics(File::create(path)?, run)
}

pub fn read_diagnostics<R: Read>(input: R) -> Result<Vec<DiagRecord>> {
    read_table(input, &DIAG_HEADER)?
        .into_iter()
        .map(|(at, r)| {
            Ok(DiagRecord {
                iter: field(&r, 0, at, "iter")?,
                time: field(&r, 1, at, "time")?,
                sup_norm: field(&r, 2, at, "sup_norm")?,
                mean: field(&r, 3, at, "mean")?,
                tv_energy: field(&r, 4, at, "tv_energy")?,
                increment: field(&r, 5, at, "increment")?,
            })
        })
        .collect()
}

pub fn read_diagnostics_csv(path: impl AsRef<Path>) -> Result<Vec<DiagRecord>> {
    read_diagnostics(File::open(path)?)
}

pub fn write_stability<W: Write>(out: W, map: &StabilityMap) -> Result<()> {
    let rows = map.cells().into_iter().map(|(th, dt, e)| {
        vec![
            fmt_f64(th),
            fmt_f64(dt),
            e.map_or_else(|| NA.to_string(), fmt_f64),
        ]
    });
    write_table(out, &STABILITY_HEADER, rows)
}

pub fn write_stability_csv(path: impl AsRef<Path>, map: &StabilityMap) -> Result<()> {
    write_stability(File::create(path)?, map)
}

/// Rebuilds the map from rows in theta-major order, as written by [`write_stability`].
pub fn read_stability<R: Read>(input: R) -> Result<StabilityMap> {
    let rows = read_table(input, &STABILITY_HEADER)?;
    let mut thetas: Vec<f64> = Vec::new();
    let mut dts: Vec<f64> = Vec::new();
    let mut cells = Vec::with_capacity(rows.len());
    for (at, r) in &rows {
        let th: f64 = field(r, 0, *at, "theta")?;
        let dt: f64 = field(r, 1, *at, "dt")?;
        let e = if &r[2] == NA {
            None
        } else {
            Some(field::<f64>(r, 2, *at, "eps_min")?)
        };
        if thetas.last() != Some(&th) {
            thetas.push(th);
        }
        if thetas.len() == 1 {
            dts.push(dt);
        }
        cells.push((*at, th, dt, e));
    }
    if thetas.len() * dts.len() != cells.len() {
        return Err(Error::Format {
            offset: 0,
            reason: "rows do not form a full theta x dt grid".into(),
        });
    }
    let mut eps_min = vec![Vec::with_capacity(dts.len()); thetas.len()];
    for (k, (at, th, dt, e)) in cells.into_iter().enumerate() {
        let (a, b) = (k / dts.len(), k % dts.len());
        if th != thetas[a] || dt != dts[b] {
            return Err(Error::Format {
                offset: at,
                reason: "row out of theta-major order".into(),
            });
        }
        eps_min[a].push(e);
    }
    Ok(StabilityMap {
        theta_values: thetas,
        dt_values: dts,
        eps_min,
    })
}

pub fn read_stability_csv(path: impl AsRef<Path>) -> Result<StabilityMap> {
    read_stability(File::open(path)?)
}
