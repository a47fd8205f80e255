use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{Hold, ThetaVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovarianceKind {
    /// Asymptotic Cramér-Rao lower bound.
    Crlb,
    /// SRIVC asymptotic covariance with matching regressor and instrument holds.
    SrivcAnalytic,
    /// SRIVC asymptotic covariance (sandwich form) with mismatched holds.
    SrivcMismatched,
    /// Bound obtained by interpolating the sampled noise-free output.
    LiteratureCrlb,
    /// Monte Carlo estimate.
    Empirical,
}

impl CovarianceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Crlb => "crlb",
            Self::SrivcAnalytic => "srivc_analytic",
            Self::SrivcMismatched => "srivc_mismatched",
            Self::LiteratureCrlb => "literature_crlb",
            Self::Empirical => "empirical",
        }
    }
}

impl std::fmt::Display for CovarianceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Settings a report was computed under. Fields that do not apply to a kind
/// are left empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_hold: Option<Hold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instrument_hold: Option<Hold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_hold: Option<Hold>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_variance: Option<f64>,
    /// Condition number of the matrix that was inverted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition_number: Option<f64>,
    /// `lyapunov`, `time-average`, or `sem` for Monte Carlo standard errors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runs: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceReport {
    pub matrix: DMatrix<f64>,
    pub kind: CovarianceKind,
    pub lambda: f64,
    /// Entrywise standard errors; only Monte Carlo reports carry them.
    pub stderr: Option<DMatrix<f64>>,
    pub metadata: ReportMetadata,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    kind: CovarianceKind,
    lambda: f64,
    dimension: usize,
    #[serde(flatten)]
    metadata: ReportMetadata,
}

impl CovarianceReport {
    pub fn new(matrix: DMatrix<f64>, kind: CovarianceKind, lambda: f64, metadata: ReportMetadata) -> Self {
        Self {
            matrix,
            kind,
            lambda,
            stderr: None,
            metadata,
        }
    }

    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().copied().collect()
    }

    /// Largest `|M_ij - M_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.matrix.amax().max(f64::MIN_POSITIVE);
        (&self.matrix - self.matrix.transpose()).amax() / scale
    }

    /// Smallest eigenvalue of the symmetric part divided by the trace.
    pub fn min_eigenvalue_ratio(&self) -> f64 {
        let sym = (&self.matrix + self.matrix.transpose()) * 0.5;
        let trace = sym.trace().abs().max(f64::MIN_POSITIVE);
        sym.symmetric_eigenvalues().min() / trace
    }

    /// Symmetric within `1e-10` relative and eigenvalues `>= -1e-10 trace`.
    pub fn is_valid(&self) -> bool {
        self.matrix.is_square()
            && self.matrix.iter().all(|v| v.is_finite())
            && (self.matrix.amax() == 0.0 || (self.asymmetry() <= 1e-10 && self.min_eigenvalue_ratio() >= -1e-10))
    }

    /// Long-format CSV: `row,col,value,stderr` (stderr empty when absent).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,value,stderr\n");
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                let se = self
                    .stderr
                    .as_ref()
                    .map(|s| format!("{:.16e}", s[(i, j)]))
                    .unwrap_or_default();
                writeln!(out, "{i},{j},{:.16e},{se}", self.matrix[(i, j)]).expect("string write");
            }
        }
        out
    }

    pub fn sidecar_toml(&self) -> String {
        let sidecar = Sidecar {
            kind: self.kind,
            lambda: self.lambda,
            dimension: self.dimension(),
            metadata: self.metadata.clone(),
        };
        toml::to_string(&sidecar).expect("report metadata serializes")
    }

    /// Writes `<stem>.csv` and the `<stem>.toml` sidecar into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>, stem: &str) -> Result<(PathBuf, PathBuf)> {
        let dir = dir.as_ref();
        let csv_path = dir.join(format!("{stem}.csv"));
        let toml_path = dir.join(format!("{stem}.toml"));
        std::fs::write(&csv_path, self.to_csv())?;
        std::fs::write(&toml_path, self.sidecar_toml())?;
        Ok((csv_path, toml_path))
    }

    pub fn load(dir: impl AsRef<Path>, stem: &str) -> Result<Self> {
        let dir = dir.as_ref();
        let sidecar: Sidecar = toml::from_str(&std::fs::read_to_string(dir.join(format!("{stem}.toml")))?)
            .map_err(|e| Error::Config(e.to_string()))?;
        let text = std::fs::read_to_string(dir.join(format!("{stem}.csv")))?;
        Self::from_parts(&text, sidecar)
    }

    fn from_parts(csv_text: &str, sidecar: Sidecar) -> Result<Self> {
        let n = sidecar.dimension;
        let mut matrix = DMatrix::from_element(n, n, f64::NAN);
        let mut stderr = DMatrix::from_element(n, n, f64::NAN);
        let mut has_stderr = false;
        let mut reader = csv::Reader::from_reader(csv_text.as_bytes());
        for (k, rec) in reader.records().enumerate() {
            let line = k + 2;
            let parse_err = |message: String| Error::Parse { line, message };
            let rec = rec.map_err(|e| parse_err(e.to_string()))?;
            if rec.len() != 4 {
                return Err(parse_err(format!("expected 4 fields, found {}", rec.len())));
            }
            let i: usize = rec[0].parse().map_err(|_| parse_err("bad row index".into()))?;
            let j: usize = rec[1].parse().map_err(|_| parse_err("bad column index".into()))?;
            if i >= n || j >= n {
                return Err(parse_err(format!("index ({i}, {j}) outside a {n}x{n} matrix")));
            }
            matrix[(i, j)] = rec[2].parse().map_err(|_| parse_err("bad value".into()))?;
            if !rec[3].is_empty() {
                stderr[(i, j)] = rec[3].parse().map_err(|_| parse_err("bad stderr".into()))?;
                has_stderr = true;
            }
        }
        if matrix.iter().any(|v| v.is_nan()) {
            return Err(Error::Parse {
                line: 0,
                message: "matrix entries missing".into(),
            });
        }
        Ok(Self {
            matrix,
            kind: sidecar.kind,
            lambda: sidecar.lambda,
            stderr: has_stderr.then_some(stderr),
            metadata: sidecar.metadata,
        })
    }
}
