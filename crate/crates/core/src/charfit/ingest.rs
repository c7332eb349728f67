use std::collections::BTreeSet;
use std::io::{Read, Write};

use thiserror::Error;

use super::sweep::{GridRecord, PhaseSpaceMap, Provenance};

const HEADER: [&str; 4] = ["theta_rad", "phi_rad", "p0", "shots"];

/// Problems found while reading a grid CSV. Line numbers are 1-based and
/// count the header.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("line {line}: {message}")]
    Malformed { line: u64, message: String },

    #[error("bad header {found:?}, expected \"theta_rad,phi_rad,p0,shots\"")]
    BadHeader { found: String },

    #[error("line {line}: p0 = {p0} outside [0, 1]")]
    P0OutOfRange { line: u64, p0: f64 },

    #[error("line {line}: duplicate grid point (theta = {theta}, phi = {phi})")]
    Duplicate { line: u64, theta: f64, phi: f64 },

    #[error("grid has no records")]
    Empty,

    #[error("grid is not square: {records} records")]
    NotSquare { records: usize },

    #[error("missing grid points: {distinct_theta} distinct theta and {distinct_phi} distinct phi values give {expected} points, found {found}")]
    MissingPoints {
        distinct_theta: usize,
        distinct_phi: usize,
        expected: usize,
        found: usize,
    },
}

fn malformed(line: u64, message: impl Into<String>) -> IngestError {
    IngestError::Malformed { line, message: message.into() }
}

/// Reads a `theta_rad,phi_rad,p0,shots` CSV into a validated, complete grid
/// sorted Θ-major.
pub fn ingest_grid<R: Read>(reader: R) -> Result<PhaseSpaceMap, IngestError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| malformed(1, e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != HEADER {
        return Err(IngestError::BadHeader { found: header.iter().collect::<Vec<_>>().join(",") });
    }

    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for row in rdr.records() {
        let row = row.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = row.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64, IngestError> {
            let s = &row[i];
            let v: f64 = s.parse().map_err(|_| malformed(line, format!("{} = {s:?} is not a number", HEADER[i])))?;
            if !v.is_finite() {
                return Err(malformed(line, format!("{} is not finite", HEADER[i])));
            }
            Ok(v)
        };
        let theta = field(0)?;
        let phi = field(1)?;
        let p0 = field(2)?;
        let shots: u64 = row[3]
            .parse()
            .map_err(|_| malformed(line, format!("shots = {:?} is not a non-negative integer", &row[3])))?;
        if !(0.0..=1.0).contains(&p0) {
            return Err(IngestError::P0OutOfRange { line, p0 });
        }
        if !seen.insert((theta.to_bits(), phi.to_bits())) {
            return Err(IngestError::Duplicate { line, theta, phi });
        }
        records.push(GridRecord { theta, phi, p0, shots });
    }

    if records.is_empty() {
        return Err(IngestError::Empty);
    }
    let thetas: BTreeSet<u64> = records.iter().map(|r| r.theta.to_bits()).collect();
    let phis: BTreeSet<u64> = records.iter().map(|r| r.phi.to_bits()).collect();
    let expected = thetas.len() * phis.len();
    if records.len() != expected {
        return Err(IngestError::MissingPoints {
            distinct_theta: thetas.len(),
            distinct_phi: phis.len(),
            expected,
            found: records.len(),
        });
    }
    if thetas.len() != phis.len() {
        return Err(IngestError::NotSquare { records: records.len() });
    }
    records.sort_by(|a, b| a.theta.total_cmp(&b.theta).then(a.phi.total_cmp(&b.phi)));
    Ok(PhaseSpaceMap {
        n_points: thetas.len(),
        records,
        provenance: Provenance::Ingested,
        visit_order: None,
    })
}

/// Writes a grid in the same CSV form [`ingest_grid`] reads.
pub fn write_grid<W: Write>(writer: W, map: &PhaseSpaceMap) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in &map.records {
        w.serialize(r)?;
    }
    if map.records.is_empty() {
        w.write_record(HEADER)?;
    }
    w.flush()?;
    Ok(())
}
