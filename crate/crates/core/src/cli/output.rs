//! CSV and 16-bit PGM serialization of phase grids.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::grid::PhaseGrid;

/// 17 significant digits, exponent form, locale independent.
pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// `# fixed: ...`, the column header, then one row per point in row-major
/// order. With `terms` the W1, W2, W3 columns are appended.
pub fn grid_csv(grid: &PhaseGrid, with_terms: bool) -> String {
    let [first, second] = grid.slice.free;
    let mut out = String::new();
    let fixed: Vec<String> = grid
        .slice
        .fixed
        .iter()
        .map(|(l, v)| format!("{l}={}", fmt_value(*v)))
        .collect();
    let _ = writeln!(out, "# fixed: {}", fixed.join(","));
    let terms = grid.terms.as_ref().filter(|_| with_terms);
    let _ = write!(out, "{},{},W", first.label, second.label);
    if terms.is_some() {
        out.push_str(",W1,W2,W3");
    }
    out.push('\n');
    for row in 0..grid.rows() {
        let b = fmt_value(second.point(row));
        for col in 0..grid.cols() {
            let idx = row * grid.cols() + col;
            let _ = write!(out, "{},{},{}", fmt_value(first.point(col)), b, fmt_value(grid.values[idx]));
            if let Some(t) = terms {
                for v in t[idx] {
                    out.push(',');
                    out.push_str(&fmt_value(v));
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Binary P5, 16-bit big-endian, `[min, max]` mapped linearly onto
/// `[0, 65535]`. The first image row is the largest value of the second
/// axis, so the picture has the usual orientation.
pub fn grid_pgm(grid: &PhaseGrid) -> (Vec<u8>, f64, f64) {
    let (min, max) = grid
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = max - min;
    let mut bytes = format!("P5\n{} {}\n65535\n", grid.cols(), grid.rows()).into_bytes();
    for row in (0..grid.rows()).rev() {
        for col in 0..grid.cols() {
            let level = if span > 0.0 {
                ((grid.get(row, col) - min) / span * 65535.0).round() as u16
            } else {
                0
            };
            bytes.extend_from_slice(&level.to_be_bytes());
        }
    }
    (bytes, min, max)
}

/// Inverse of the grey-level mapping, `min + level * (max - min) / 65535`.
pub fn pgm_sidecar(grid: &PhaseGrid, min: f64, max: f64) -> String {
    let [first, second] = grid.slice.free;
    format!(
        "min={}\nmax={}\ncolumns={} {}..{}\nrows={} {}..{} (top row = max)\nvalue=min+level*(max-min)/65535\n",
        fmt_value(min),
        fmt_value(max),
        first.label,
        fmt_value(first.min),
        fmt_value(first.max),
        second.label,
        fmt_value(second.min),
        fmt_value(second.max),
    )
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// One written file and the hash of its contents.
#[derive(Clone, Debug)]
pub struct Written {
    pub path: PathBuf,
    pub sha256: String,
}

fn write_file(path: &Path, bytes: &[u8]) -> io::Result<Written> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, bytes)?;
    Ok(Written {
        path: path.to_path_buf(),
        sha256: sha256_hex(bytes),
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes `<prefix>.csv`, `<prefix>_terms.csv`, `<prefix>.pgm` and
/// `<prefix>.pgm.txt` as requested.
pub fn write_grid(
    grid: &PhaseGrid,
    prefix: &Path,
    csv: bool,
    pgm: bool,
    terms: bool,
) -> io::Result<Vec<Written>> {
    let mut written = Vec::new();
    if csv {
        written.push(write_file(&with_suffix(prefix, ".csv"), grid_csv(grid, false).as_bytes())?);
    }
    if terms && grid.terms.is_some() {
        written.push(write_file(
            &with_suffix(prefix, "_terms.csv"),
            grid_csv(grid, true).as_bytes(),
        )?);
    }
    if pgm {
        let (bytes, min, max) = grid_pgm(grid);
        written.push(write_file(&with_suffix(prefix, ".pgm"), &bytes)?);
        written.push(write_file(
            &with_suffix(prefix, ".pgm.txt"),
            pgm_sidecar(grid, min, max).as_bytes(),
        )?);
    }
    Ok(written)
}
