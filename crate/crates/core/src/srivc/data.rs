use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Sampled input/output record at a uniform sampling period.
#[derive(Debug, Clone, PartialEq)]
pub struct DataRecord {
    pub u: Vec<f64>,
    pub y: Vec<f64>,
    pub period: f64,
}

impl DataRecord {
    pub fn new(u: Vec<f64>, y: Vec<f64>, period: f64) -> Result<Self> {
        if u.len() != y.len() {
            return Err(Error::Dimension(format!(
                "input has {} samples, output has {}",
                u.len(),
                y.len()
            )));
        }
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidSamplePeriod(period));
        }
        Ok(Self { u, y, period })
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    /// Writes `t,u,y` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = String::with_capacity(64 * (self.len() + 1));
        buf.push_str("t,u,y\n");
        for k in 0..self.len() {
            let t = k as f64 * self.period;
            writeln!(buf, "{t:.16e},{:.16e},{:.16e}", self.u[k], self.y[k]).expect("string write");
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(f))
    }

    /// Parses a `t,u,y` CSV. The sampling period is taken from the first two
    /// time stamps and checked for uniformity.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = reader.headers().map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?;
        let cols: Vec<&str> = headers.iter().collect();
        if cols != ["t", "u", "y"] {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header `t,u,y`, found `{}`", cols.join(",")),
            });
        }
        let (mut t, mut u, mut y) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in reader.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if rec.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 fields, found {}", rec.len()),
                });
            }
            let field = |j: usize| -> Result<f64> {
                let v: f64 = rec[j].parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{}` is not a number", &rec[j]),
                })?;
                if !v.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: "non-finite value".into(),
                    });
                }
                Ok(v)
            };
            t.push(field(0)?);
            u.push(field(1)?);
            y.push(field(2)?);
        }
        if t.len() < 2 {
            return Err(Error::Parse {
                line: t.len() + 2,
                message: "need at least two samples".into(),
            });
        }
        let period = t[1] - t[0];
        if !(period > 0.0) {
            return Err(Error::Parse {
                line: 3,
                message: "time stamps must increase".into(),
            });
        }
        for k in 1..t.len() {
            let expected = t[0] + k as f64 * period;
            if (t[k] - expected).abs() > 1e-6 * period {
                return Err(Error::Parse {
                    line: k + 2,
                    message: format!("non-uniform sampling: t = {}, expected {expected}", t[k]),
                });
            }
        }
        Self::new(u, y, period)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(f))
    }
}
