//! CSV and JSON serialization of run results.
//!
//! Floats are written in Rust's shortest round-trip form, so identical
//! results give identical bytes.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use qsd_core::{EnsembleResult, Error, C64};

pub struct CsvTable {
    writer: csv::Writer<Vec<u8>>,
    error: Option<csv::Error>,
}

impl CsvTable {
    pub fn new(header: &[&str]) -> Self {
        let mut t = Self {
            writer: csv::Writer::from_writer(Vec::new()),
            error: None,
        };
        t.record(header.iter().map(|s| s.to_string()).collect());
        t
    }

    fn record(&mut self, fields: Vec<String>) {
        if self.error.is_none() {
            self.error = self.writer.write_record(&fields).err();
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        self.record(values.iter().map(f64::to_string).collect());
    }

    pub fn row_strings(&mut self, fields: Vec<String>) {
        self.record(fields);
    }

    pub fn finish(self) -> Result<Vec<u8>, Error> {
        if let Some(e) = self.error {
            return Err(Error::InvalidArgument(format!("csv: {e}")));
        }
        self.writer
            .into_inner()
            .map_err(|e| Error::InvalidArgument(format!("csv: {}", e.error())))
    }
}

/// `grid,mean_re,mean_im,std_error`.
pub fn series_csv(res: &EnsembleResult) -> Result<Vec<u8>, Error> {
    let mut t = CsvTable::new(&["grid", "mean_re", "mean_im", "std_error"]);
    for k in 0..res.grid.len() {
        t.row(&[res.grid[k], res.mean[k].re, res.mean[k].im, res.std_error[k]]);
    }
    t.finish()
}

/// `grid,ref_re,ref_im`.
pub fn reference_csv(grid: &[f64], values: &[C64]) -> Result<Vec<u8>, Error> {
    let mut t = CsvTable::new(&["grid", "ref_re", "ref_im"]);
    for (x, z) in grid.iter().zip(values) {
        t.row(&[*x, z.re, z.im]);
    }
    t.finish()
}

/// Pretty JSON with a trailing newline. Non-finite floats become `null`.
pub fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable");
    v.push(b'\n');
    v
}

/// Writes every file into `dir`, creating it first.
pub fn write_all(dir: &Path, files: &[(String, Vec<u8>)]) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    files
        .iter()
        .map(|(name, bytes)| {
            let path = dir.join(name);
            fs::write(&path, bytes)?;
            Ok(path)
        })
        .collect()
}
