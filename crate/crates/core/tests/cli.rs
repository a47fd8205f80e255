use std::path::Path;
use std::process::{Command, Output};

use srivc::efficiency::CovarianceReport;
use srivc::lti::{Hold, ThetaVector};
use srivc::montecarlo::{generate_input, simulate_system, trial_stream, ExperimentConfig, StreamRole};

const SIM1: &str = r#"
theta = { a = [0.1], b = [10.0] }
period = 0.01
samples = 2000
runs = 20
lambda = 1.0
seed = 3
"#;

fn srivc(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_srivc"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn noise_free_csv(dir: &Path) -> String {
    let theta = ThetaVector::new(vec![0.04, 0.2], vec![1.0]).unwrap();
    let u = generate_input(3000, 1.0, &mut trial_stream(1, 0, StreamRole::Input));
    let data = simulate_system(&u, &theta, 0.0, 0.1, Hold::Zoh, &mut trial_stream(1, 0, StreamRole::Noise)).unwrap();
    let p = dir.join("data.csv");
    data.save(&p).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn estimate_recovers_noise_free_system() {
    let dir = tempfile::tempdir().unwrap();
    let data = noise_free_csv(dir.path());
    let cfg = write(dir.path(), "est.toml", "theta_init = { a = [0.04, 0.2], b = [1.0] }\n");
    let out = srivc(dir.path(), &["estimate", "--data", &data, "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("estimate.toml")).unwrap();
    let doc: toml::Table = text.parse().unwrap();
    let theta: ThetaVector = doc["theta"].clone().try_into().unwrap();
    for (est, truth) in theta.stacked().iter().zip([0.04, 0.2, 1.0]) {
        assert!((est - truth).abs() < 1e-8 * truth);
    }
    assert_eq!(doc["converged"].as_bool(), Some(true));
}

#[test]
fn estimate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = noise_free_csv(dir.path());
    let one_step = write(
        dir.path(),
        "one.toml",
        "theta_init = { a = [0.05, 0.25], b = [0.9] }\nepsilon = inf\n",
    );
    let out = srivc(dir.path(), &["estimate", "--data", &data, "--config", &one_step]);
    assert_eq!(out.status.code(), Some(0));
    let doc: toml::Table = std::fs::read_to_string(dir.path().join("estimate.toml"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(doc["iterations"].as_integer(), Some(1));

    let stingy = write(
        dir.path(),
        "stingy.toml",
        "theta_init = { a = [0.05, 0.25], b = [0.9] }\nmax_iter = 1\nepsilon = 1e-300\n",
    );
    let out = srivc(dir.path(), &["estimate", "--data", &data, "--config", &stingy]);
    assert_eq!(out.status.code(), Some(2));

    let empty = write(dir.path(), "empty.csv", "");
    let out = srivc(dir.path(), &["estimate", "--data", &empty, "--config", &one_step]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let unstable = write(dir.path(), "unstable.toml", "theta_init = { a = [-0.04, 0.2], b = [1.0] }\n");
    let out = srivc(dir.path(), &["estimate", "--data", &data, "--config", &unstable]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn crlb_files_and_lambda_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim1.toml", SIM1);
    let out = srivc(dir.path(), &["crlb", "--config", &cfg, "--literature", "zoh"]);
    assert_eq!(out.status.code(), Some(0));
    let crlb = CovarianceReport::load(dir.path(), "crlb").unwrap();
    let lit = CovarianceReport::load(dir.path(), "literature_zoh").unwrap();
    assert!((crlb.matrix[(0, 0)] / 8.0334e-3 - 1.0).abs() < 5e-4);
    assert!((lit.matrix[(0, 0)] / 7.2629e-3 - 1.0).abs() < 5e-4);
    assert!(dir.path().join("literature_zoh_minus_crlb.csv").exists());

    let doubled = tempfile::tempdir().unwrap();
    let out = srivc(doubled.path(), &["crlb", "--config", &cfg, "--lambda", "2", "--literature", "foh"]);
    assert_eq!(out.status.code(), Some(0));
    let crlb2 = CovarianceReport::load(doubled.path(), "crlb").unwrap();
    assert!((&crlb2.matrix - &crlb.matrix * 2.0).amax() < 1e-12 * crlb2.matrix.amax());
    let foh = CovarianceReport::load(doubled.path(), "literature_foh").unwrap();
    assert!(((&foh.matrix * 0.5)[(0, 0)] / lit.matrix[(0, 0)] - 1.0).abs() > 1e-3);
}

#[test]
fn cov_reports_mismatched_instrument() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "sim1.toml", SIM1);
    let out = srivc(dir.path(), &["cov", "--config", &cfg, "--instrument-hold", "foh"]);
    assert_eq!(out.status.code(), Some(0));
    let cov = CovarianceReport::load(dir.path(), "srivc_cov_foh").unwrap();
    let crlb = CovarianceReport::load(dir.path(), "crlb").unwrap();
    assert!(cov.matrix[(0, 0)] > crlb.matrix[(0, 0)]);
    let out = srivc(dir.path(), &["cov", "--config", &cfg, "--instrument-hold", "linear"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn mc_outputs_are_reproducible_and_sidecar_round_trips() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = write(a.path(), "sim1.toml", SIM1);
    for dir in [a.path(), b.path()] {
        let out = srivc(dir, &["mc", "--config", &cfg, "--seed", "11"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["runs_vs_cov.csv", "mc_cov.csv", "mc_cov.toml", "estimates.csv", "metadata.toml"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    let runs = std::fs::read_to_string(a.path().join("runs_vs_cov.csv")).unwrap();
    assert!(runs.starts_with("runs,entry,value,stderr\n10,P11,"));
    assert!(runs.lines().last().unwrap().starts_with("20,P22,"));

    let back = ExperimentConfig::load(a.path().join("metadata.toml")).unwrap();
    let mut original = ExperimentConfig::from_toml_str(SIM1).unwrap();
    original.seed = 11;
    assert_eq!(back, original);
}

#[test]
fn sweep_writes_variance_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sweep.toml",
        "theta = { a = [0.04, 0.2], b = [1.0] }\nperiod = 0.1\nsamples = [500, 1000]\nruns = 4\nlambda = 0.0\n\n[srivc]\ninstrument_hold = \"foh\"\n",
    );
    let out = srivc(dir.path(), &["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("variance_vs_N.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("N,parameter_index,empirical_variance,crlb_variance,variant")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert_eq!(r[4], "foh_instrument");
        // noise-free data: every variant recovers the system
        assert!(r[2].parse::<f64>().unwrap().abs() < 1e-12);
    }
    assert!(ExperimentConfig::load(dir.path().join("metadata_foh_instrument.toml")).is_ok());
}

#[test]
fn usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(srivc(dir.path(), &["repro", "--sim", "3"]).status.code(), Some(1));
    assert_eq!(srivc(dir.path(), &["repro", "--sim", "1", "--scale", "huge"]).status.code(), Some(1));
    assert_eq!(srivc(dir.path(), &["mc"]).status.code(), Some(1));
    let bad = write(dir.path(), "bad.toml", "theta = { a = [0.1], b = [10.0] }\nperiod = -1\nsamples = 10\nlambda = 1\n");
    assert_eq!(srivc(dir.path(), &["mc", "--config", &bad]).status.code(), Some(1));
}
