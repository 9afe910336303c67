//! Numeric CSV tables with `# key: value` metadata lines.
//!
//! Values are written with Rust's shortest round-trip formatting, so reading a
//! table back yields bit-identical `f64`s.

use std::io::{BufRead, BufReader, Read, Write};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_meta(mut self, key: impl Into<String>, value: impl ToString) -> Self {
        self.push_meta(key, value);
        self
    }

    pub fn push_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push_row(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                actual: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in &self.meta {
            if k.contains(['\n', ':']) || v.contains('\n') {
                return Err(Error::Table(format!("metadata entry `{k}` is not single-line")));
            }
            writeln!(out, "# {k}: {v}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|x| format!("{x}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Table(e.to_string()))
    }

    pub fn read<R: Read>(input: R) -> Result<Self> {
        let mut reader = BufReader::new(input);
        let mut meta = Vec::new();
        let mut line = String::new();
        let mut body = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            match line.strip_prefix('#') {
                Some(rest) if body.is_empty() => {
                    let (k, v) = rest
                        .trim()
                        .split_once(':')
                        .ok_or_else(|| Error::Table(format!("bad metadata line `{}`", line.trim())))?;
                    meta.push((k.trim().to_string(), v.trim().to_string()));
                }
                _ => {
                    body.push_str(&line);
                    reader.read_to_string(&mut body)?;
                    break;
                }
            }
        }

        let mut r = csv::Reader::from_reader(body.as_bytes());
        let columns: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.parse::<f64>().map_err(|_| {
                        Error::Table(format!("row {}: `{f}` is not a number", i + 1))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok(Self {
            meta,
            columns,
            rows,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let mut t = Table::new(["frequency_hz", "psd_db"])
            .with_meta("seed", 42)
            .with_meta("units", "Hz, dB re shot noise");
        let vals = [0.1 + 0.2, 1.0 / 3.0, f64::MIN_POSITIVE, -1e300, 6.02e-23, 0.0];
        for v in vals {
            t.push_row(vec![v, v.exp()]).unwrap();
        }
        let text = t.to_csv_string().unwrap();
        assert!(text.starts_with("# seed: 42\n# units: Hz, dB re shot noise\nfrequency_hz,psd_db\n"));
        let back = Table::read(text.as_bytes()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.meta("seed"), Some("42"));
        for (a, b) in back.rows.iter().zip(&t.rows) {
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn shape_and_parse_errors() {
        let mut t = Table::new(["a", "b"]);
        assert!(t.push_row(vec![1.0]).is_err());
        assert!(Table::read("a,b\n1,x\n".as_bytes()).is_err());
        assert!(Table::read("# no separator\na\n1\n".as_bytes()).is_err());
        assert!(Table::new(["a"]).with_meta("k", "two\nlines").to_csv_string().is_err());
    }
}
