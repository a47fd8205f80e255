use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lti::{Hold, ThetaVector};
use crate::srivc::SrivcConfig;

/// A single sample size or a list of them for sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Samples {
    One(usize),
    Sweep(Vec<usize>),
}

impl Samples {
    pub fn values(&self) -> Vec<usize> {
        match self {
            Samples::One(n) => vec![*n],
            Samples::Sweep(v) => v.clone(),
        }
    }
}

/// `"auto"` uses every available core; an integer pins the worker count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Auto,
    Workers(usize),
}

impl Serialize for Parallelism {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Parallelism::Auto => s.serialize_str("auto"),
            Parallelism::Workers(k) => s.serialize_u64(*k as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Parallelism {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Count(usize),
        }
        match Raw::deserialize(d)? {
            Raw::Text(s) if s.eq_ignore_ascii_case("auto") => Ok(Parallelism::Auto),
            Raw::Text(s) => Err(serde::de::Error::custom(format!(
                "parallelism must be \"auto\" or a worker count, got \"{s}\""
            ))),
            Raw::Count(k) => Ok(Parallelism::Workers(k)),
        }
    }
}

fn default_max_iter() -> usize {
    200
}

fn default_epsilon() -> f64 {
    1e-12
}

fn default_variance() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

/// Estimator settings as they appear in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrivcSettings {
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// `inf` stops after a single iteration.
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default)]
    pub output_hold: Option<Hold>,
    /// Defaults to the data input hold.
    #[serde(default)]
    pub instrument_hold: Option<Hold>,
    /// Defaults to the true system parameters.
    #[serde(default)]
    pub theta_init: Option<ThetaVector>,
}

impl Default for SrivcSettings {
    fn default() -> Self {
        Self {
            max_iter: default_max_iter(),
            epsilon: default_epsilon(),
            output_hold: None,
            instrument_hold: None,
            theta_init: None,
        }
    }
}

/// Everything that determines a Monte Carlo experiment.
///
/// ```toml
/// theta = { a = [0.1], b = [10.0] }
/// period = 0.01
/// samples = 50000          # or a list for sweeps
/// runs = 2000
/// lambda = 1.0
/// input_variance = 1.0
/// input_hold = "zoh"
/// seed = 1
/// parallelism = "auto"
///
/// [srivc]
/// epsilon = 1e-12
/// max_iter = 200
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub theta: ThetaVector,
    pub period: f64,
    pub samples: Samples,
    #[serde(default = "default_runs")]
    pub runs: usize,
    pub lambda: f64,
    #[serde(default = "default_variance")]
    pub input_variance: f64,
    #[serde(default = "default_hold")]
    pub input_hold: Hold,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub parallelism: Parallelism,
    /// Samples simulated and discarded before each record starts.
    #[serde(default)]
    pub warmup: usize,
    /// Keep per-run estimates in the result.
    #[serde(default = "default_true")]
    pub keep_estimates: bool,
    #[serde(default)]
    pub srivc: SrivcSettings,
}

fn default_runs() -> usize {
    1
}

fn default_hold() -> Hold {
    Hold::Zoh
}

impl ExperimentConfig {
    pub fn new(theta: ThetaVector, period: f64, samples: usize, runs: usize, lambda: f64) -> Self {
        Self {
            theta,
            period,
            samples: Samples::One(samples),
            runs,
            lambda,
            input_variance: 1.0,
            input_hold: Hold::Zoh,
            seed: 0,
            parallelism: Parallelism::Auto,
            warmup: 0,
            keep_estimates: true,
            srivc: SrivcSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.theta.validate()?;
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::InvalidSamplePeriod(self.period));
        }
        if self.runs < 1 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        let ns = self.samples.values();
        if ns.is_empty() {
            return Err(Error::Config("samples list is empty".into()));
        }
        if let Some(n) = ns.iter().find(|&&n| n < self.theta.len()) {
            return Err(Error::Config(format!(
                "sample size {n} is below the parameter count {}",
                self.theta.len()
            )));
        }
        // lambda = 0 is allowed: noise-free experiments are a useful check
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!("lambda must be non-negative, got {}", self.lambda)));
        }
        if !(self.input_variance > 0.0 && self.input_variance.is_finite()) {
            return Err(Error::Config(format!(
                "input_variance must be positive, got {}",
                self.input_variance
            )));
        }
        if self.parallelism == Parallelism::Workers(0) {
            return Err(Error::Config("parallelism must be at least 1 worker".into()));
        }
        if let Some(init) = &self.srivc.theta_init {
            if (init.n(), init.m()) != (self.theta.n(), self.theta.m()) {
                return Err(Error::Config("theta_init has a different model order than theta".into()));
            }
        }
        self.srivc_config()?.validate()
    }

    /// The estimator configuration every trial uses.
    pub fn srivc_config(&self) -> Result<SrivcConfig> {
        let init = self.srivc.theta_init.clone().unwrap_or_else(|| self.theta.clone());
        let mut cfg = SrivcConfig::new(init, self.period)
            .with_input_hold(self.input_hold)
            .with_output_hold(self.srivc.output_hold.unwrap_or(Hold::Zoh));
        if let Some(h) = self.srivc.instrument_hold {
            cfg = cfg.with_instrument_hold(h);
        }
        cfg.max_iter = self.srivc.max_iter;
        cfg.epsilon = self.srivc.epsilon;
        Ok(cfg)
    }

    pub fn instrument_hold(&self) -> Hold {
        self.srivc.instrument_hold.unwrap_or(self.input_hold)
    }

    /// Parses and validates a config. A metadata sidecar (a document with a
    /// `[config]` table) is accepted as well.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        if let Some(toml::Value::Table(inner)) = table.remove("config") {
            table = inner;
        }
        let cfg: Self = table.try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
