//! Series import/export: single-column CSV with header "x", plus an
//! optional JSON sidecar carrying the simulation truth.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::models::{SeriesSample, SeriesTruth};

/// Write the series as single-column CSV with header "x".
pub fn write_series_csv(path: &Path, x: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "x")?;
    for v in x {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}

/// Read a single-column series CSV (header line required).
pub fn read_series_csv(path: &Path) -> Result<SeriesSample> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| Error::InvalidArgument(format!("{}: empty file", path.display())))?;
    if header.trim() != "x" {
        return Err(Error::InvalidArgument(format!(
            "{}: expected header \"x\", found \"{}\"",
            path.display(),
            header.trim()
        )));
    }
    let mut x = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let v: f64 = text.parse().map_err(|_| {
            Error::InvalidArgument(format!(
                "{}: line {}: cannot parse \"{text}\" as a number",
                path.display(),
                i + 2
            ))
        })?;
        x.push(v);
    }
    SeriesSample::from_values(x)
}

/// Write the truth sidecar as JSON.
pub fn write_truth_json(path: &Path, truth: &SeriesTruth) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, truth)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_series() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let x = vec![1.5, -2.25, 0.0, 1e-12, 12345.6789];
        write_series_csv(&path, &x).unwrap();
        let back = read_series_csv(&path).unwrap();
        assert_eq!(back.x, x);
    }

    #[test]
    fn rejects_bad_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "y\n1.0\n").unwrap();
        assert!(read_series_csv(&path).is_err());
        std::fs::write(&path, "x\n1.0\nnot-a-number\n").unwrap();
        let err = read_series_csv(&path).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(read_series_csv(Path::new("/nonexistent/file.csv")).is_err());
    }
}
