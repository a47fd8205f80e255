//! Command-line front end. Every subcommand reads a TOML config, writes CSV
//! and TOML artifacts into the output directory, and prints a short summary.
//!
//! Exit codes: 0 success, 1 error (including usage errors), 2 when an
//! estimation did not converge.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::efficiency::{crlb_asymptotic, literature_crlb, srivc_asymptotic_cov, CovarianceReport};
use crate::error::{Error, Result};
use crate::lti::{Hold, ThetaVector};
use crate::montecarlo::{run_experiment, sweep_sample_size, ExperimentConfig, McResult, Samples, STDERR_METHOD};
use crate::srivc::{srivc_estimate, verify_converging_point, DataRecord, SrivcConfig};

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "SRIVC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "srivc", version, about = "SRIVC estimation, asymptotic covariance and Monte Carlo studies")]
pub struct Cli {
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default: current directory, or $SRIVC_OUT_DIR).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a model from a `t,u,y` CSV file.
    Estimate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: PathBuf,
    },
    /// Asymptotic CRLB, optionally next to the interpolated-output variant.
    Crlb {
        #[arg(long)]
        config: PathBuf,
        /// Also compute the bound that interpolates the sampled output with this hold.
        #[arg(long)]
        literature: Option<Hold>,
        /// Overrides the noise variance in the config.
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// SRIVC asymptotic covariance for an instrument built with the given hold.
    Cov {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        instrument_hold: Hold,
        #[arg(long)]
        lambda: Option<f64>,
    },
    /// Monte Carlo experiment at a single sample size.
    Mc {
        #[arg(long)]
        config: PathBuf,
    },
    /// Monte Carlo sweep over the configured list of sample sizes.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Reproduce one of the two reference simulations.
    Repro {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        sim: u8,
        #[arg(long, value_enum, default_value_t = Scale::Desk)]
        scale: Scale,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scale {
    /// The published settings (hours of CPU time).
    Full,
    /// Reduced run counts and sample sizes that finish in minutes.
    Desk,
}

/// How a successful command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::NotConverged => 2,
        }
    }
}

/// Estimator-only configuration for `estimate`. A full experiment config is
/// accepted too; its `theta` then serves as the initial value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    pub theta_init: ThetaVector,
    #[serde(default = "zoh")]
    pub input_hold: Hold,
    #[serde(default = "zoh")]
    pub output_hold: Hold,
    #[serde(default)]
    pub instrument_hold: Option<Hold>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn zoh() -> Hold {
    Hold::Zoh
}

fn default_max_iter() -> usize {
    200
}

fn default_epsilon() -> f64 {
    1e-12
}

impl EstimateConfig {
    fn to_srivc(&self, period: f64) -> SrivcConfig {
        let mut cfg = SrivcConfig::new(self.theta_init.clone(), period)
            .with_input_hold(self.input_hold)
            .with_output_hold(self.output_hold);
        if let Some(h) = self.instrument_hold {
            cfg = cfg.with_instrument_hold(h);
        }
        cfg.max_iter = self.max_iter;
        cfg.epsilon = self.epsilon;
        cfg
    }

    fn from_experiment(exp: &ExperimentConfig) -> Self {
        Self {
            theta_init: exp.srivc.theta_init.clone().unwrap_or_else(|| exp.theta.clone()),
            input_hold: exp.input_hold,
            output_hold: exp.srivc.output_hold.unwrap_or(Hold::Zoh),
            instrument_hold: exp.srivc.instrument_hold,
            max_iter: exp.srivc.max_iter,
            epsilon: exp.srivc.epsilon,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        match toml::from_str::<Self>(&text) {
            Ok(cfg) => Ok(cfg),
            Err(own) => match ExperimentConfig::from_toml_str(&text) {
                Ok(exp) => Ok(Self::from_experiment(&exp)),
                Err(_) => Err(Error::Config(own.to_string())),
            },
        }
    }
}

#[derive(Serialize)]
struct EstimateOutput<'a> {
    converged: bool,
    iterations: usize,
    stabilized: usize,
    theta: &'a ThetaVector,
    relative_errors: &'a [f64],
    condition_numbers: &'a [f64],
    /// `|| (1/N) sum inst (y - B/A u) ||` at the returned estimate.
    converging_point_residual: f64,
    samples: usize,
    period: f64,
    config: &'a EstimateConfig,
}

/// Sidecar written next to Monte Carlo artifacts; re-parses as a config.
#[derive(Serialize)]
struct McSidecar<'a> {
    tool: &'static str,
    version: &'static str,
    stderr_method: &'static str,
    variant: &'a str,
    results: Vec<McSummary>,
    config: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct McSummary {
    samples: usize,
    converged_runs: usize,
    convergence_rate: f64,
    mean_iterations: f64,
    failed_trials: Vec<usize>,
}

impl McSummary {
    fn of(r: &McResult) -> Self {
        Self {
            samples: r.samples,
            converged_runs: r.empirical_cov.metadata.runs.unwrap_or(0),
            convergence_rate: r.convergence_rate,
            mean_iterations: r.mean_iterations,
            failed_trials: r.failed_runs.iter().map(|f| f.trial).collect(),
        }
    }
}

struct Context {
    out: PathBuf,
    seed: Option<u64>,
}

impl Context {
    fn file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write(&self, name: &str, text: &str) -> Result<()> {
        std::fs::write(self.file(name), text)?;
        Ok(())
    }

    fn experiment(&self, path: &Path) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(path)?;
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<Outcome> {
    let out = cli
        .out
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    let ctx = Context { out, seed: cli.seed };
    match cli.command {
        Command::Estimate { data, config } => cmd_estimate(&ctx, &data, &config),
        Command::Crlb {
            config,
            literature,
            lambda,
        } => cmd_crlb(&ctx, &config, literature, lambda),
        Command::Cov {
            config,
            instrument_hold,
            lambda,
        } => cmd_cov(&ctx, &config, instrument_hold, lambda),
        Command::Mc { config } => {
            let cfg = ctx.experiment(&config)?;
            cmd_mc(&ctx, &cfg)
        }
        Command::Sweep { config } => {
            let cfg = ctx.experiment(&config)?;
            run_sweep(&ctx, &[cfg]).map(|_| Outcome::Success)
        }
        Command::Repro { sim, scale } => cmd_repro(&ctx, sim, scale),
    }
}

/// Parses `args` and runs; usage errors exit with 1 so that 2 keeps
/// meaning non-convergence.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(outcome) => outcome.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn format_matrix(m: &DMatrix<f64>) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{:>14.6e}", m[(i, j)])).collect();
        writeln!(s, "  [{}]", row.join(" ")).expect("string write");
    }
    s
}

fn print_report(name: &str, r: &CovarianceReport) {
    print!("{name} ({}, lambda = {}):\n{}", r.kind, r.lambda, format_matrix(&r.matrix));
}

fn cmd_estimate(ctx: &Context, data_path: &Path, config: &Path) -> Result<Outcome> {
    let data = DataRecord::load(data_path)?;
    let ecfg = EstimateConfig::load(config)?;
    let cfg = ecfg.to_srivc(data.period);
    cfg.validate()?;
    let est = srivc_estimate(&data, &cfg)?;
    let resid = verify_converging_point(&data, &est.theta, &cfg)?;
    let resid_norm = resid.iter().map(|r| r * r).sum::<f64>().sqrt();
    let out = EstimateOutput {
        converged: est.converged,
        iterations: est.iterations,
        stabilized: est.stabilized,
        theta: &est.theta,
        relative_errors: &est.relative_errors,
        condition_numbers: &est.condition_numbers,
        converging_point_residual: resid_norm,
        samples: data.len(),
        period: data.period,
        config: &ecfg,
    };
    ctx.write(
        "estimate.toml",
        &toml::to_string(&out).map_err(|e| Error::Config(e.to_string()))?,
    )?;
    println!(
        "theta = a {:?}, b {:?}\nconverged = {} after {} iterations, residual = {resid_norm:.3e}",
        est.theta.a, est.theta.b, est.converged, est.iterations
    );
    Ok(if est.converged {
        Outcome::Success
    } else {
        eprintln!("estimator did not converge within {} iterations", cfg.max_iter);
        Outcome::NotConverged
    })
}

fn cmd_crlb(ctx: &Context, config: &Path, literature: Option<Hold>, lambda: Option<f64>) -> Result<Outcome> {
    let cfg = ctx.experiment(config)?;
    let lambda = lambda.unwrap_or(cfg.lambda);
    let crlb = crlb_asymptotic(&cfg.theta, lambda, cfg.period, cfg.input_hold, cfg.input_variance)?;
    crlb.save(&ctx.out, "crlb")?;
    print_report("CRLB", &crlb);
    if let Some(hold) = literature {
        let lit = literature_crlb(&cfg.theta, lambda, cfg.period, cfg.input_hold, hold, cfg.input_variance)?;
        let stem = format!("literature_{hold}");
        lit.save(&ctx.out, &stem)?;
        print_report(&format!("interpolated-output bound ({hold})"), &lit);
        let diff = &lit.matrix - &crlb.matrix;
        let mut text = String::from("row,col,difference,relative\n");
        for i in 0..diff.nrows() {
            for j in 0..diff.ncols() {
                writeln!(
                    text,
                    "{i},{j},{:.16e},{:.16e}",
                    diff[(i, j)],
                    diff[(i, j)] / crlb.matrix[(i, j)]
                )
                .expect("string write");
            }
        }
        ctx.write(&format!("{stem}_minus_crlb.csv"), &text)?;
        print!("difference:\n{}", format_matrix(&diff));
    }
    Ok(Outcome::Success)
}

fn cmd_cov(ctx: &Context, config: &Path, instrument_hold: Hold, lambda: Option<f64>) -> Result<Outcome> {
    let cfg = ctx.experiment(config)?;
    let lambda = lambda.unwrap_or(cfg.lambda);
    let cov = srivc_asymptotic_cov(
        &cfg.theta,
        lambda,
        cfg.period,
        cfg.input_hold,
        instrument_hold,
        cfg.input_variance,
    )?;
    let crlb = crlb_asymptotic(&cfg.theta, lambda, cfg.period, cfg.input_hold, cfg.input_variance)?;
    cov.save(&ctx.out, &format!("srivc_cov_{instrument_hold}"))?;
    crlb.save(&ctx.out, "crlb")?;
    print_report(&format!("SRIVC covariance, instrument hold {instrument_hold}"), &cov);
    let ratios: Vec<String> = cov
        .diagonal()
        .iter()
        .zip(crlb.diagonal())
        .map(|(c, b)| format!("{:.4}", c / b))
        .collect();
    println!("diagonal ratio to CRLB: [{}]", ratios.join(", "));
    Ok(Outcome::Success)
}

/// Run counts at which the running covariance is reported: 10, 20, 50, 100, ...
fn run_schedule(total: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut decade = 10;
    'outer: loop {
        for k in [1, 2, 5] {
            let r = k * decade;
            if r >= total {
                break 'outer;
            }
            v.push(r);
        }
        decade *= 10;
    }
    v.push(total);
    v
}

fn entry_label(i: usize, j: usize) -> String {
    format!("P{}{}", i + 1, j + 1)
}

fn runs_vs_cov_csv(res: &McResult) -> Result<String> {
    let total = res.per_run_estimates.as_ref().map(|e| e.nrows()).unwrap_or(0);
    let mut text = String::from("runs,entry,value,stderr\n");
    for runs in run_schedule(total) {
        let rep = res.covariance_over(runs)?;
        let se = rep.stderr.as_ref().expect("empirical reports carry stderr");
        for i in 0..rep.dimension() {
            for j in i..rep.dimension() {
                writeln!(
                    text,
                    "{runs},{},{:.16e},{:.16e}",
                    entry_label(i, j),
                    rep.matrix[(i, j)],
                    se[(i, j)]
                )
                .expect("string write");
            }
        }
    }
    Ok(text)
}

fn estimates_csv(res: &McResult) -> Option<String> {
    let est = res.per_run_estimates.as_ref()?;
    let d = est.ncols();
    let (n, _) = (res.theta_true.n(), res.theta_true.m());
    let mut header: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    header.extend((0..d - n).map(|i| format!("b{i}")));
    let mut text = header.join(",") + "\n";
    for row in est.row_iter() {
        let vals: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(text, "{}", vals.join(",")).expect("string write");
    }
    Some(text)
}

fn sidecar(variant: &str, results: &[&McResult], cfg: &ExperimentConfig) -> Result<String> {
    let s = McSidecar {
        tool: "srivc",
        version: env!("CARGO_PKG_VERSION"),
        stderr_method: STDERR_METHOD,
        variant,
        results: results.iter().map(|r| McSummary::of(r)).collect(),
        config: cfg,
    };
    toml::to_string(&s).map_err(|e| Error::Config(e.to_string()))
}

fn report_failures(res: &McResult) {
    if !res.failed_runs.is_empty() {
        eprintln!(
            "{} of {} runs excluded at N = {} (first: trial {}: {})",
            res.failed_runs.len(),
            res.failed_runs.len() + res.empirical_cov.metadata.runs.unwrap_or(0),
            res.samples,
            res.failed_runs[0].trial,
            res.failed_runs[0].reason
        );
    }
}

fn cmd_mc(ctx: &Context, cfg: &ExperimentConfig) -> Result<Outcome> {
    let res = run_experiment(cfg)?;
    report_failures(&res);
    let crlb = crlb_asymptotic(&cfg.theta, cfg.lambda, cfg.period, cfg.input_hold, cfg.input_variance)?;
    res.empirical_cov.save(&ctx.out, "mc_cov")?;
    crlb.save(&ctx.out, "crlb")?;
    if cfg.instrument_hold() != cfg.input_hold {
        srivc_asymptotic_cov(
            &cfg.theta,
            cfg.lambda,
            cfg.period,
            cfg.input_hold,
            cfg.instrument_hold(),
            cfg.input_variance,
        )?
        .save(&ctx.out, "srivc_cov")?;
    }
    if res.per_run_estimates.is_some() {
        ctx.write("runs_vs_cov.csv", &runs_vs_cov_csv(&res)?)?;
        if let Some(text) = estimates_csv(&res) {
            ctx.write("estimates.csv", &text)?;
        }
    }
    ctx.write("metadata.toml", &sidecar(&variant_name(cfg), &[&res], cfg)?)?;
    print_report("empirical AsCov", &res.empirical_cov);
    print_report("CRLB", &crlb);
    println!("convergence rate {:.4}", res.convergence_rate);
    Ok(Outcome::Success)
}

fn variant_name(cfg: &ExperimentConfig) -> String {
    if cfg.instrument_hold() == cfg.input_hold {
        "matched".into()
    } else {
        format!("{}_instrument", cfg.instrument_hold())
    }
}

/// Runs one sweep per config (variants share seeds) and writes a single
/// `variance_vs_N.csv`. Variances are per-sample-size (`AsCov / N`).
fn run_sweep(ctx: &Context, cfgs: &[ExperimentConfig]) -> Result<Vec<Vec<McResult>>> {
    let mut text = String::from("N,parameter_index,empirical_variance,crlb_variance,variant\n");
    let mut all = Vec::new();
    for cfg in cfgs {
        let variant = variant_name(cfg);
        let crlb = crlb_asymptotic(&cfg.theta, cfg.lambda, cfg.period, cfg.input_hold, cfg.input_variance)?;
        let results = sweep_sample_size(cfg)?;
        for res in &results {
            report_failures(res);
            let n = res.samples as f64;
            for i in 0..cfg.theta.len() {
                writeln!(
                    text,
                    "{},{i},{:.16e},{:.16e},{variant}",
                    res.samples,
                    res.empirical_cov.matrix[(i, i)] / n,
                    crlb.matrix[(i, i)] / n
                )
                .expect("string write");
            }
            println!(
                "{variant:>16} N = {:>7}: AsCov diagonal / CRLB = [{}]",
                res.samples,
                res.empirical_cov
                    .diagonal()
                    .iter()
                    .zip(crlb.diagonal())
                    .map(|(e, c)| format!("{:.3}", e / c))
                    .collect::<Vec<_>>()
                    .join(", ")
            );
        }
        let suffix = if variant == "matched" {
            String::new()
        } else {
            format!("_{variant}")
        };
        ctx.write(
            &format!("metadata{suffix}.toml"),
            &sidecar(&variant, &results.iter().collect::<Vec<_>>(), cfg)?,
        )?;
        crlb.save(&ctx.out, "crlb")?;
        all.push(results);
    }
    ctx.write("variance_vs_N.csv", &text)?;
    Ok(all)
}

/// Reference settings for simulation 1 (first-order system).
pub fn simulation1(scale: Scale) -> ExperimentConfig {
    let theta = ThetaVector::new(vec![0.1], vec![10.0]).expect("valid parameters");
    let (n, runs) = match scale {
        Scale::Full => (200_000, 50_000),
        Scale::Desk => (50_000, 2000),
    };
    let mut cfg = ExperimentConfig::new(theta, 0.01, n, runs, 1.0);
    cfg.seed = 1;
    cfg
}

/// Reference settings for simulation 2 (second-order system); the second
/// config builds the instrument with a FOH on the input.
pub fn simulation2(scale: Scale) -> [ExperimentConfig; 2] {
    let theta = ThetaVector::new(vec![0.04, 0.2], vec![1.0]).expect("valid parameters");
    let (samples, runs) = match scale {
        // eight logarithmically spaced sizes from 1e3 to 2e5
        Scale::Full => (
            (0..8)
                .map(|k| (1e3 * 200f64.powf(k as f64 / 7.0)).round() as usize)
                .collect(),
            10_000,
        ),
        Scale::Desk => (vec![1000, 10_000, 100_000], 500),
    };
    let mut matched = ExperimentConfig::new(theta, 0.1, 0, runs, 1.0);
    matched.samples = Samples::Sweep(samples);
    matched.seed = 2;
    let mut foh = matched.clone();
    foh.srivc.instrument_hold = Some(Hold::Foh);
    [matched, foh]
}

fn cmd_repro(ctx: &Context, sim: u8, scale: Scale) -> Result<Outcome> {
    match sim {
        1 => {
            let mut cfg = simulation1(scale);
            if let Some(s) = ctx.seed {
                cfg.seed = s;
            }
            ctx.write("config.toml", &cfg.to_toml())?;
            let lit = literature_crlb(&cfg.theta, cfg.lambda, cfg.period, cfg.input_hold, Hold::Zoh, 1.0)?;
            lit.save(&ctx.out, "literature_zoh")?;
            cmd_mc(ctx, &cfg)
        }
        2 => {
            let mut cfgs = simulation2(scale);
            for c in cfgs.iter_mut() {
                if let Some(s) = ctx.seed {
                    c.seed = s;
                }
            }
            ctx.write("config.toml", &cfgs[0].to_toml())?;
            ctx.write("config_foh_instrument.toml", &cfgs[1].to_toml())?;
            let c = &cfgs[1];
            srivc_asymptotic_cov(&c.theta, c.lambda, c.period, c.input_hold, Hold::Foh, c.input_variance)?
                .save(&ctx.out, "srivc_cov_foh")?;
            run_sweep(ctx, &cfgs)?;
            Ok(Outcome::Success)
        }
        other => Err(Error::Config(format!("unknown simulation {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule() {
        assert_eq!(run_schedule(2000), vec![10, 20, 50, 100, 200, 500, 1000, 2000]);
        assert_eq!(run_schedule(7), vec![7]);
        assert_eq!(run_schedule(50), vec![10, 20, 50]);
    }

    #[test]
    fn reference_settings() {
        let full = simulation2(Scale::Full);
        let ns = full[0].samples.values();
        assert_eq!(ns.len(), 8);
        assert_eq!((ns[0], ns[7]), (1000, 200_000));
        assert_eq!(full[1].instrument_hold(), Hold::Foh);
        assert_eq!(full[0].seed, full[1].seed);
        for c in full.iter().chain(simulation2(Scale::Desk).iter()) {
            c.validate().unwrap();
        }
        simulation1(Scale::Full).validate().unwrap();
        assert_eq!(simulation1(Scale::Desk).runs, 2000);
    }

    #[test]
    fn usage_errors_exit_with_one() {
        assert_eq!(main_with_args(["srivc", "repro", "--sim", "3"]), 1);
        assert_eq!(main_with_args(["srivc", "frobnicate"]), 1);
        assert_eq!(main_with_args(["srivc", "--help"]), 0);
    }
}
