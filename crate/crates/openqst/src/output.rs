//! CSV and manifest files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, Result};

/// Positional decimal with 12 significant digits; scientific outside
/// `[1e-5, 1e12)` so that no digits are lost to padding.
pub fn format_number(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".to_owned() } else { x.to_string() };
    }
    let sci = format!("{x:.11e}");
    let exponent: i32 = sci.rsplit_once('e').and_then(|(_, e)| e.parse().ok()).expect("exponent");
    if !(-5..12).contains(&exponent) {
        return sci;
    }
    format!("{x:.*}", (11 - exponent).max(0) as usize)
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))
}

/// Writes a header and numeric rows.
pub fn write_csv<const W: usize>(path: &Path, header: [&str; W], rows: impl IntoIterator<Item = [f64; W]>) -> Result<()> {
    let wrap = |source| CliError::Csv { path: path.to_owned(), source };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(header).map_err(wrap)?;
    for row in rows {
        w.write_record(row.map(format_number)).map_err(wrap)?;
    }
    w.flush().map_err(CliError::io(path))
}

/// `axis_value,f_max,t_a`, where the axis value may be a label.
pub fn write_summary(path: &Path, rows: &[(String, f64, f64)]) -> Result<()> {
    let wrap = |source| CliError::Csv { path: path.to_owned(), source };
    let mut w = csv::Writer::from_path(path).map_err(wrap)?;
    w.write_record(["axis_value", "f_max", "t_a"]).map_err(wrap)?;
    for (value, f, t) in rows {
        w.write_record([value.clone(), format_number(*f), format_number(*t)]).map_err(wrap)?;
    }
    w.flush().map_err(CliError::io(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json { path: path.to_owned(), source })?;
    fs::write(path, text + "\n").map_err(CliError::io(path))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.to_owned(), source })
}

pub fn file(dir: &Path, label: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{label}_{suffix}"))
}
