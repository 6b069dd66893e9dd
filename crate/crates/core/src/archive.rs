//! Eigenvalue archives: many spectra of one dimension, stored as CSV or raw
//! little-endian binary.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::ensemble::{sample_gue, sample_wigner, EnsembleConfig};
use crate::error::{Error, Result};
use crate::rng::StreamFactory;
use crate::spectral::{eigenvalues, Spectrum};

const MAGIC: &[u8; 5] = b"WLAB1";

#[derive(Debug, Clone, PartialEq)]
pub struct Archive {
    pub n: usize,
    pub label: String,
    pub samples: Vec<Spectrum>,
}

impl Archive {
    pub fn new(n: usize, label: impl Into<String>, samples: Vec<Spectrum>) -> Result<Self> {
        let label = label.into();
        if label.contains([',', '\n', '\r']) {
            return Err(Error::InvalidConfig(
                "archive label may not contain ',' or newlines".into(),
            ));
        }
        if let Some(s) = samples.iter().find(|s| s.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: s.len(),
            });
        }
        Ok(Self { n, label, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Diagonalizes `config.sample_count` Wigner matrices; sample `i` uses
    /// stream `i` of the seed, so the archive does not depend on the thread
    /// schedule.
    pub fn generate(config: &EnsembleConfig, label: &str) -> Result<Self> {
        config.validate()?;
        let f = StreamFactory::new(config.seed);
        let samples = (0..config.sample_count as u64)
            .into_par_iter()
            .map(|i| eigenvalues(&sample_wigner(config, &mut f.stream(i))?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(config.n, label, samples)
    }

    /// GUE archive with the same per-sample stream convention.
    pub fn generate_gue(n: usize, samples: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroDimension);
        }
        let f = StreamFactory::new(seed);
        let s = (0..samples as u64)
            .into_par_iter()
            .map(|i| eigenvalues(&sample_gue(n, &mut f.stream(i))?))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, "gue", s)
    }

    /// Header `N,samples,label`, then one row per spectrum. Floats use the
    /// shortest representation that round-trips exactly.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{},{},{}", self.n, self.samples.len(), self.label)?;
        let mut line = String::new();
        for s in &self.samples {
            line.clear();
            for (i, v) in s.values().iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&v.to_string());
            }
            writeln!(w, "{line}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| fmt_err(1, "empty archive"))??;
        let mut parts = header.splitn(3, ',');
        let n: usize = parse_field(parts.next(), 1, "N")?;
        let count: usize = parse_field(parts.next(), 1, "samples")?;
        let label = parts.next().unwrap_or("").to_string();
        if n == 0 {
            return Err(fmt_err(1, "N must be positive"));
        }
        let mut samples = Vec::with_capacity(count);
        for (k, line) in lines.enumerate() {
            let lineno = k + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> = line.split(',').map(|t| t.trim().parse::<f64>()).collect();
            let row = row.map_err(|e| fmt_err(lineno, &format!("bad number: {e}")))?;
            if row.len() != n {
                return Err(fmt_err(
                    lineno,
                    &format!("row has {} values, header says N = {n}", row.len()),
                ));
            }
            let s = Spectrum::new(row).map_err(|e| fmt_err(lineno, &e.to_string()))?;
            samples.push(s);
        }
        if samples.len() != count {
            return Err(fmt_err(
                samples.len() + 2,
                &format!("found {} rows, header says {count}", samples.len()),
            ));
        }
        Ok(Self { n, label, samples })
    }

    /// `WLAB1`, u64 N, u64 sample count, then the values as f64, all
    /// little-endian. The label is not stored.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.samples.len() as u64).to_le_bytes())?;
        for s in &self.samples {
            for v in s.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic).map_err(|_| fmt_err(0, "truncated header"))?;
        if &magic != MAGIC {
            return Err(fmt_err(0, "bad magic, expected WLAB1"));
        }
        let mut word = [0u8; 8];
        r.read_exact(&mut word).map_err(|_| fmt_err(0, "truncated header"))?;
        let n = u64::from_le_bytes(word) as usize;
        r.read_exact(&mut word).map_err(|_| fmt_err(0, "truncated header"))?;
        let count = u64::from_le_bytes(word) as usize;
        if n == 0 {
            return Err(fmt_err(0, "N must be positive"));
        }
        let mut samples = Vec::with_capacity(count);
        for k in 0..count {
            let mut row = Vec::with_capacity(n);
            for _ in 0..n {
                r.read_exact(&mut word)
                    .map_err(|_| fmt_err(k + 1, "truncated payload"))?;
                row.push(f64::from_le_bytes(word));
            }
            samples.push(Spectrum::new(row).map_err(|e| fmt_err(k + 1, &e.to_string()))?);
        }
        Ok(Self {
            n,
            label: String::new(),
            samples,
        })
    }

    /// Writes binary for a `.bin` extension, CSV otherwise.
    pub fn save(&self, path: &Path) -> Result<()> {
        let w = BufWriter::new(File::create(path)?);
        if is_binary(path) {
            self.write_binary(w)
        } else {
            self.write_csv(w)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let r = BufReader::new(File::open(path)?);
        if is_binary(path) {
            Self::read_binary(r)
        } else {
            Self::read_csv(r)
        }
    }
}

fn is_binary(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "bin")
}

fn fmt_err(line: usize, message: &str) -> Error {
    Error::Format {
        line,
        message: message.to_string(),
    }
}

fn parse_field<T: std::str::FromStr>(s: Option<&str>, line: usize, name: &str) -> Result<T> {
    s.and_then(|t| t.trim().parse().ok())
        .ok_or_else(|| fmt_err(line, &format!("missing or invalid {name} in header")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Archive {
        let s = |v: &[f64]| Spectrum::new(v.to_vec()).unwrap();
        Archive::new(3, "t", vec![s(&[-1.0, 0.1, 1.0 / 3.0]), s(&[-2.0, 1e-300, 7.5])]).unwrap()
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let a = small();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("3,2,t\n"));
        assert_eq!(Archive::read_csv(&buf[..]).unwrap(), a);
    }

    #[test]
    fn binary_round_trip_is_exact() {
        let a = small();
        let mut buf = Vec::new();
        a.write_binary(&mut buf).unwrap();
        let b = Archive::read_binary(&buf[..]).unwrap();
        assert_eq!(b.samples, a.samples);
        buf[0] = b'X';
        assert!(matches!(Archive::read_binary(&buf[..]), Err(Error::Format { .. })));
    }

    #[test]
    fn row_length_mismatch_reports_line() {
        let text = "3,2,x\n1,2,3\n1,2\n";
        match Archive::read_csv(text.as_bytes()) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let text = "3,1,x\n3,2,1\n";
        assert!(matches!(
            Archive::read_csv(text.as_bytes()),
            Err(Error::Format { line: 2, .. })
        ));
    }
}
