use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Shortest decimal that round-trips to the same `f64` (at most 17
/// significant digits); exponent form outside `[1e-5, 1e16)`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// Where artifacts go, and the files written so far.
pub struct Sink {
    dir: PathBuf,
    prefix: String,
    gnuplot: bool,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: PathBuf, prefix: String, gnuplot: bool) -> CliResult<Self> {
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        Ok(Self { dir, prefix, gnuplot, written: Vec::new() })
    }

    /// `name` inside the output directory, unless already absolute.
    pub fn resolve(&self, name: &Path) -> PathBuf {
        if name.is_absolute() {
            name.to_path_buf()
        } else {
            self.dir.join(name)
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{}{name}", self.prefix))
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// CSV with a header row; every value through [`fmt_f64`].
    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> CliResult<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| CliError::io(&path, e))?;
        w.write_record(header).map_err(|e| CliError::io(&path, e))?;
        for row in rows {
            w.write_record(row.iter().map(|&x| fmt_f64(x))).map_err(|e| CliError::io(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        if self.gnuplot {
            self.gnuplot_file(name, header, rows)?;
        }
        Ok(())
    }

    /// Whitespace-separated copy of a CSV table, with a blank line whenever the
    /// second column changes in 3-column tables (gnuplot `splot` blocks).
    fn gnuplot_file(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> CliResult<()> {
        let path = self.path(&format!("{}.dat", name.trim_end_matches(".csv")));
        let mut out = format!("# {}\n", header.join(" "));
        let mut prev: Option<f64> = None;
        for row in rows {
            if header.len() == 3 && prev.is_some_and(|y| y != row[1]) {
                out.push('\n');
            }
            prev = row.get(1).copied();
            out.push_str(&row.iter().map(|&x| fmt_f64(x)).collect::<Vec<_>>().join(" "));
            out.push('\n');
        }
        fs::write(&path, out).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(&path, e))?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        self.written.push(path);
        Ok(())
    }
}

/// Rows of a CSV table with a header, parsed as floats.
pub fn read_csv(path: &Path, header: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path, e))?;
    let found: Vec<String> = r.headers().map_err(|e| CliError::io(path, e))?.iter().map(str::to_string).collect();
    if found != header {
        return Err(CliError::io(path, format!("expected columns {header:?}, found {found:?}")));
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| CliError::io(path, e))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| CliError::io(path, format!("row {}: {e}", i + 1)))?;
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0, -2.5e-7, 1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE, std::f64::consts::FRAC_1_SQRT_2] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let digits = s.chars().take_while(|c| *c != 'e').filter(char::is_ascii_digit).count();
            assert!(digits <= 18, "{s}");
        }
        assert_eq!(fmt_f64(1.0), "1.0");
        assert_eq!(fmt_f64(1e-7), "1e-7");
    }
}
