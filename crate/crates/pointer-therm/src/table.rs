//! CSV files for trajectories and sweeps.
//!
//! Every number is written in scientific notation with 17 significant
//! digits, so parsing a file gives back the exact `f64` values.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use pointer_therm_core::analysis::{postulate1_deviation, projection_line_distance, SweepResult};
use pointer_therm_core::TrajectoryRecord;

pub const TRAJECTORY_COLUMNS: [&str; 9] =
    ["t", "rx", "ry", "rz", "entropy", "p1_diag", "p2_diag", "offdiag_re", "offdiag_im"];

pub const SWEEP_COLUMNS: [&str; 10] = [
    "lambda",
    "rx",
    "ry",
    "rz",
    "entropy",
    "p1_diag",
    "p2_diag",
    "offdiag_abs",
    "line_distance",
    "postulate1_dev",
];

#[derive(Debug, thiserror::Error)]
pub enum TableError {
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{}: expected header `{expected}`, found `{found}`", path.display())]
    Header { path: PathBuf, expected: String, found: String },

    #[error("{}: line {line}: bad value `{value}`", path.display())]
    Value { path: PathBuf, line: u64, value: String },

    #[error("sweep geometry: {0}")]
    Geometry(#[from] pointer_therm_core::Error),
}

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn trajectory_rows(record: &TrajectoryRecord) -> Vec<[f64; 9]> {
    record
        .samples
        .iter()
        .map(|s| [s.t, s.bloch.x, s.bloch.y, s.bloch.z, s.entropy, s.p1_diag, s.p2_diag, s.offdiag.re, s.offdiag.im])
        .collect()
}

pub fn sweep_rows(sweep: &SweepResult) -> Result<Vec<[f64; 10]>, TableError> {
    sweep
        .points
        .iter()
        .map(|p| {
            Ok([
                p.lambda,
                p.bloch.x,
                p.bloch.y,
                p.bloch.z,
                p.entropy,
                p.elements.d1,
                p.elements.d2,
                p.elements.offdiag.norm(),
                projection_line_distance(p.bloch, &sweep.geometry)?,
                postulate1_deviation(&p.steady, &sweep.geometry)?,
            ])
        })
        .collect()
}

/// Writes a header and rows to `out`; `path` only labels errors.
pub fn write_rows<W: Write, const N: usize>(
    out: W,
    path: &Path,
    header: &[&str; N],
    rows: &[[f64; N]],
) -> Result<(), TableError> {
    let wrap = |source| TableError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row.iter().map(|v| format_value(*v))).map_err(wrap)?;
    }
    w.flush().map_err(|source| TableError::Io { path: path.to_path_buf(), source })
}

/// Reads rows from `input`, checking the header against `header`.
pub fn read_rows<R: Read, const N: usize>(input: R, path: &Path, header: &[&str; N]) -> Result<Vec<[f64; N]>, TableError> {
    let wrap = |source| TableError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let found = r.headers().map_err(wrap)?;
    if found.iter().ne(header.iter().copied()) {
        return Err(TableError::Header {
            path: path.to_path_buf(),
            expected: header.join(","),
            found: found.iter().collect::<Vec<_>>().join(","),
        });
    }
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(wrap)?;
        let line = record.position().map_or(0, |p| p.line());
        let mut row = [0.0; N];
        if record.len() != N {
            return Err(TableError::Value { path: path.to_path_buf(), line, value: record.iter().collect::<Vec<_>>().join(",") });
        }
        for (slot, field) in row.iter_mut().zip(record.iter()) {
            *slot = field
                .parse()
                .map_err(|_| TableError::Value { path: path.to_path_buf(), line, value: field.to_string() })?;
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn write_file<const N: usize>(path: &Path, header: &[&str; N], rows: &[[f64; N]]) -> Result<(), TableError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| TableError::Io { path: dir.to_path_buf(), source })?;
    }
    let file = File::create(path).map_err(|source| TableError::Io { path: path.to_path_buf(), source })?;
    write_rows(std::io::BufWriter::new(file), path, header, rows)
}

pub fn read_file<const N: usize>(path: &Path, header: &[&str; N]) -> Result<Vec<[f64; N]>, TableError> {
    let file = File::open(path).map_err(|source| TableError::Io { path: path.to_path_buf(), source })?;
    read_rows(std::io::BufReader::new(file), path, header)
}

pub fn write_trajectory(path: &Path, record: &TrajectoryRecord) -> Result<(), TableError> {
    write_file(path, &TRAJECTORY_COLUMNS, &trajectory_rows(record))
}

pub fn read_trajectory(path: &Path) -> Result<Vec<[f64; 9]>, TableError> {
    read_file(path, &TRAJECTORY_COLUMNS)
}

pub fn write_sweep(path: &Path, sweep: &SweepResult) -> Result<(), TableError> {
    write_file(path, &SWEEP_COLUMNS, &sweep_rows(sweep)?)
}

pub fn read_sweep(path: &Path) -> Result<Vec<[f64; 10]>, TableError> {
    read_file(path, &SWEEP_COLUMNS)
}
