use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use erb::experiment::{run_experiment, ExperimentConfig, ExperimentKind, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION};
use erb::simulate::ProcessModel;
use erb::spectra::AutocovarianceSpec;

fn erb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erb")).args(args).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .skip(2)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn six_nats_sweep_from_toml() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("six_nats_sweep.toml");
    let out = erb(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));

    let csv = fs::read_to_string(tmp.path().join("six_nats_sweep.csv")).unwrap();
    assert!(csv.starts_with("# erb-csv v1 experiment=six_nats_sweep unit=nats\n"));
    assert_eq!(csv.lines().nth(1), Some("noise_variance,upper,lower,gap"));
    let gaps: Vec<f64> = data_rows(&csv).iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(gaps.len(), 5);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    assert!((gaps[4] - 6.0807).abs() <= 1e-3);

    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("six_nats_sweep.json")).unwrap()).unwrap();
    assert_eq!(record["status"], "pass");
    assert_eq!(record["exit_code"], 0);
    assert_eq!(record["rows"].as_array().unwrap().len(), 5);
}

#[test]
fn bits_scale_entropy_columns_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("six_nats_sweep.toml");
    let dir = tmp.path().to_str().unwrap();
    let nats_dir = format!("{dir}/nats");
    let bits_dir = format!("{dir}/bits");
    for (unit, d) in [("nats", &nats_dir), ("bits", &bits_dir)] {
        let out = erb(&["run", "--config", cfg.to_str().unwrap(), "--out", d, "--unit", unit]);
        assert_eq!(out.status.code(), Some(EXIT_OK));
    }
    let nats = data_rows(&fs::read_to_string(format!("{nats_dir}/six_nats_sweep.csv")).unwrap());
    let bits = data_rows(&fs::read_to_string(format!("{bits_dir}/six_nats_sweep.csv")).unwrap());
    for (a, b) in nats.iter().zip(&bits) {
        assert_eq!(a[0], b[0], "noise variance is not an entropy");
        let (ga, gb): (f64, f64) = (a[3].parse().unwrap(), b[3].parse().unwrap());
        assert!((ga / std::f64::consts::LN_2 - gb).abs() <= 1e-12 * ga.abs());
    }
}

#[test]
fn negative_noise_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("invalid_negative_noise.toml");
    let out = erb(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_INPUT));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("model.noise_variance"), "{err}");
    assert!(!tmp.path().join("six_nats_sweep.csv").exists());
}

#[test]
fn malformed_configs_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let unknown = write(tmp.path(), "a.toml", "format_version = 1\nexperiment = \"bound_report\"\ncolour = 3\n");
    let version = write(tmp.path(), "b.toml", "format_version = 9\nexperiment = \"six_nats_sweep\"\n");
    let missing = write(tmp.path(), "c.toml", "format_version = 1\nexperiment = \"sandwich\"\n");
    for p in [&unknown, &version, &missing] {
        let out = erb(&["run", "--config", p.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(EXIT_INPUT), "{}", p.display());
    }
    let err = String::from_utf8_lossy(&erb(&["run", "--config", missing.to_str().unwrap()]).stderr).to_string();
    assert!(err.contains("model: required"), "{err}");
    let out = erb(&["run", "--config", "/nonexistent/erb.toml"]);
    assert_eq!(out.status.code(), Some(EXIT_INPUT));
}

#[test]
fn sandwich_config_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("sandwich_ar1.toml");
    let out = erb(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(tmp.path().join("sandwich.csv")).unwrap();
    assert!(data_rows(&csv).iter().all(|r| r[7] == "true"));
}

// 400 draws in eight strongly correlated coordinates: the kNN estimate sits
// well above the Gaussian upper bound.
#[test]
fn undersampled_sandwich_exits_with_violation() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "v.toml",
        r#"
format_version = 1
experiment = "sandwich"
seed = 3

[model]
kind = "gaussian"
spec = { kind = "ar1", parameters = { variance = 1.0, coefficient = 0.99 } }

[knobs]
ladder = [8]
sample_count = 400
bias_allowance = 0.0
"#,
    );
    let out = erb(&["run", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(EXIT_VIOLATION));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sandwich at n = 8"));
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("sandwich.json")).unwrap()).unwrap();
    assert_eq!(record["status"], "violation");
    assert_eq!(record["violations"].as_array().unwrap().len(), 1);
}

#[test]
fn replay_from_record_is_bitwise_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = AutocovarianceSpec::ar1(1.0, 0.7).unwrap();
    let mut config = ExperimentConfig::new(ExperimentKind::Sandwich, Some(ProcessModel::gaussian(spec)));
    config.seed = 42;
    config.knobs.ladder = vec![1, 3];
    config.knobs.sample_count = 5000;
    config.out = Some(tmp.path().join("first"));
    let first = run_experiment(&config).unwrap();

    let replay_dir = tmp.path().join("replay");
    let out = erb(&[
        "run",
        "--config",
        first.json_path.to_str().unwrap(),
        "--out",
        replay_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(first.exit_code));
    assert_eq!(fs::read(&first.csv_path).unwrap(), fs::read(replay_dir.join("sandwich.csv")).unwrap());

    // a different seed changes the estimates
    let other = tmp.path().join("other");
    erb(&[
        "run",
        "--config",
        first.json_path.to_str().unwrap(),
        "--out",
        other.to_str().unwrap(),
        "--seed",
        "43",
    ]);
    assert_ne!(fs::read(&first.csv_path).unwrap(), fs::read(other.join("sandwich.csv")).unwrap());
}

#[test]
fn every_shipped_config_parses() {
    for entry in fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        let c = ExperimentConfig::load(&path).unwrap();
        let valid = c.validate().is_ok();
        let expect_valid = !path.file_name().unwrap().to_str().unwrap().starts_with("invalid");
        assert_eq!(valid, expect_valid, "{}", path.display());
    }
}

#[cfg(feature = "corpus")]
#[test]
fn list_corpus_shows_constants() {
    let out = erb(&["list-corpus"]);
    assert_eq!(out.status.code(), Some(EXIT_OK));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.contains(" logistic ") && l.contains("c1=any>0")));
    assert!(text.lines().any(|l| l.contains("gaussian(ar1(1,0.5))") && l.contains("c1=3 ")));
    assert!(text.contains("two_point_product_noise"));
}
