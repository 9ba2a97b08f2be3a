//! Deterministic CSV and JSON output.
//!
//! Numbers in CSV use 12 significant digits in exponent form; lines end in
//! `\n`. JSON objects have sorted keys.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::domain::DomainSample;
use crate::model::ComplexMatrix;
use crate::spectral::Spectrum;
use crate::{Error, Result};

/// 12 significant digits, exponent form, `-0` folded to `0`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.11e}")
}

/// Output formats shared by the subcommands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "text" => Ok(Self::Text),
            other => Err(format!("unknown format {other:?} (expected csv, json or text)")),
        }
    }
}

/// A CSV table with a fixed header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn spectrum_table(s: &Spectrum) -> Table {
    let mut t = Table::new(&["re", "im"]);
    for e in &s.eigenvalues {
        t.push(vec![fmt_num(e.re), fmt_num(e.im)]);
    }
    t
}

/// One row per entry: `i,j,re,im`.
pub fn matrix_table(m: &ComplexMatrix) -> Table {
    let mut t = Table::new(&["i", "j", "re", "im"]);
    for i in 0..m.n() {
        for j in 0..m.n() {
            let z = m[(i, j)];
            t.push(vec![i.to_string(), j.to_string(), fmt_num(z.re), fmt_num(z.im)]);
        }
    }
    t
}

pub fn domain_header(ncouplings: usize) -> Vec<&'static str> {
    let mut h: Vec<&str> = crate::polyalg::COUPLING_NAMES[..ncouplings].to_vec();
    h.extend(["class", "min_gap", "max_imag"]);
    h
}

pub fn domain_row(s: &DomainSample) -> Vec<String> {
    let mut r: Vec<String> = s.couplings.values().iter().map(|&v| fmt_num(v)).collect();
    r.push(s.classification.as_str().to_string());
    r.push(fmt_num(s.min_gap));
    r.push(fmt_num(s.max_imag));
    r
}

pub fn domain_table(samples: &[DomainSample]) -> Table {
    let m = samples.first().map_or(0, |s| s.couplings.len());
    let mut t = Table::new(&domain_header(m));
    for s in samples {
        t.push(domain_row(s));
    }
    t
}

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn canonical_json(value: &impl Serialize) -> Result<String> {
    // serde_json::Map is ordered by key unless preserve_order is enabled.
    let v = serde_json::to_value(value).map_err(|e| Error::Serialization(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).expect("values always serialize");
    s.push('\n');
    Ok(s)
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write `content` to `path`, or to stdout when `path` is `None`.
pub fn write_output(path: Option<&Path>, content: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| io_err(p, e)),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}

/// Row-streaming CSV writer.
pub struct CsvStream {
    path: PathBuf,
    inner: Box<dyn Write>,
}

impl CsvStream {
    /// Opens `path` (or stdout) and writes the header.
    pub fn create(path: Option<&Path>, header: &[&str]) -> Result<Self> {
        let (path, inner): (PathBuf, Box<dyn Write>) = match path {
            Some(p) => (
                p.to_path_buf(),
                Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?)),
            ),
            None => ("<stdout>".into(), Box::new(BufWriter::new(std::io::stdout()))),
        };
        let mut s = Self { path, inner };
        s.line(&header.iter().map(|h| h.to_string()).collect::<Vec<_>>())?;
        Ok(s)
    }

    pub fn line(&mut self, fields: &[String]) -> Result<()> {
        let mut l = fields.join(",");
        l.push('\n');
        self.inner
            .write_all(l.as_bytes())
            .map_err(|e| io_err(&self.path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| io_err(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_hamiltonian;
    use crate::spectral::{eigenvalues, Tolerances};
    use crate::CouplingVector;

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(1.0), "1.00000000000e0");
        assert_eq!(fmt_num(-0.0), "0.00000000000e0");
        assert_eq!(fmt_num(-1.5e-7), "-1.50000000000e-7");
        assert_eq!(fmt_num(f64::NAN), "nan");
    }

    #[test]
    fn spectrum_csv() {
        let h = build_hamiltonian(&CouplingVector::new(3, vec![1.0]).unwrap());
        let csv = spectrum_table(&eigenvalues(&h, &Tolerances::default()).unwrap()).to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "re,im");
        assert_eq!(lines.len(), 4);
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn json_keys_sorted() {
        #[derive(Serialize)]
        struct R {
            residuals: Vec<f64>,
            n: usize,
            eliminant_text: String,
            couplings: Vec<f64>,
        }
        let s = canonical_json(&R {
            residuals: vec![0.0],
            n: 4,
            eliminant_text: "B".into(),
            couplings: vec![1.0],
        })
        .unwrap();
        let pos = |k: &str| s.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("couplings") < pos("eliminant_text"));
        assert!(pos("eliminant_text") < pos("n"));
        assert!(pos("n") < pos("residuals"));
    }

    #[test]
    fn io_errors_carry_path() {
        let err = write_output(Some(Path::new("/nonexistent-dir/x.csv")), "x").unwrap_err();
        assert!(err.to_string().starts_with("/nonexistent-dir/x.csv"));
    }
}
