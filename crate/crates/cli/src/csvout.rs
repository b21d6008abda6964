//! CSV emission with '#'-prefixed metadata lines.
//!
//! Every file carries a schema id line, the resolved parameter snapshot,
//! and optionally the seed, then a header row. Floats print in shortest
//! round-trip form, which is platform-stable, so files are byte-exact
//! reproductions for identical inputs.

use crate::CliError;
use std::io::Write;
use std::path::{Path, PathBuf};

pub struct CsvWriter {
    path: PathBuf,
    buf: Vec<u8>,
}

impl CsvWriter {
    pub fn create(
        path: impl Into<PathBuf>,
        schema: &str,
        params_json: &str,
        seed: Option<u64>,
        header: &str,
    ) -> Self {
        let mut w = Self {
            path: path.into(),
            buf: Vec::with_capacity(1 << 16),
        };
        w.comment(&format!("schema {schema}"));
        w.comment(&format!("params {params_json}"));
        if let Some(s) = seed {
            w.comment(&format!("seed {s}"));
        }
        w.line(header);
        w
    }

    pub fn comment(&mut self, text: &str) {
        self.buf.extend_from_slice(b"# ");
        self.buf.extend_from_slice(text.as_bytes());
        self.buf.push(b'\n');
    }

    pub fn line(&mut self, text: &str) {
        self.buf.extend_from_slice(text.as_bytes());
        self.buf.push(b'\n');
    }

    /// One data row from mixed fields.
    pub fn row(&mut self, fields: &[Field]) {
        let mut first = true;
        for f in fields {
            if !first {
                self.buf.push(b',');
            }
            first = false;
            match f {
                Field::F(v) => {
                    let mut tmp = [0u8; 64];
                    let s = format_f64(*v, &mut tmp);
                    self.buf.extend_from_slice(s.as_bytes());
                }
                Field::I(v) => self.buf.extend_from_slice(v.to_string().as_bytes()),
                Field::U(v) => self.buf.extend_from_slice(v.to_string().as_bytes()),
                Field::S(v) => self.buf.extend_from_slice(v.as_bytes()),
                Field::B(v) => self.buf.extend_from_slice(if *v { b"true" } else { b"false" }),
            }
        }
        self.buf.push(b'\n');
    }

    pub fn finish(self) -> Result<PathBuf, CliError> {
        if let Some(dir) = self.path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        let mut file = std::fs::File::create(&self.path).map_err(|e| CliError::io(&self.path, e))?;
        file.write_all(&self.buf).map_err(|e| CliError::io(&self.path, e))?;
        Ok(self.path)
    }
}

pub enum Field<'a> {
    F(f64),
    I(i64),
    U(u64),
    S(&'a str),
    B(bool),
}

fn format_f64(v: f64, _tmp: &mut [u8; 64]) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

/// Read back columns from one of our CSV files (used by the `spectrum`
/// command and the tests). Returns (column names, rows).
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut names = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if names.is_empty() {
            names = line.split(',').map(|s| s.trim().to_string()).collect();
            continue;
        }
        let row: Result<Vec<f64>, _> = line
            .split(',')
            .map(|s| {
                let s = s.trim();
                if s == "nan" {
                    Ok(f64::NAN)
                } else if s == "true" {
                    Ok(1.0)
                } else if s == "false" {
                    Ok(0.0)
                } else {
                    s.parse::<f64>()
                }
            })
            .collect();
        match row {
            Ok(r) => rows.push(r),
            Err(_) => {
                return Err(CliError::usage(format!(
                    "{}: non-numeric data row `{line}`",
                    path.display()
                )))
            }
        }
    }
    if names.is_empty() {
        return Err(CliError::usage(format!("{}: no header row", path.display())));
    }
    Ok((names, rows))
}
