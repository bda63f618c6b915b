//! Running an experiment from a TOML config and replaying it from the JSON
//! record it leaves behind.

use erb::experiment::{run_experiment, ExperimentConfig};

const CONFIG: &str = r#"
format_version = 1
experiment = "convergence_ladder"
unit = "bits"

[model]
kind = "gaussian"
spec = { kind = "ar1", parameters = { variance = 1.0, coefficient = 0.9 } }

[knobs]
ladder = [1, 4, 16, 64, 256]
"#;

fn main() -> erb::Result<()> {
    let dir = std::env::temp_dir().join("erb-run-config");
    let mut config = ExperimentConfig::from_toml(CONFIG)?;
    config.out = Some(dir.join("first"));
    let first = run_experiment(&config)?;
    print!("{}", std::fs::read_to_string(&first.csv_path)?);

    let mut replay = ExperimentConfig::load(&first.json_path)?;
    replay.out = Some(dir.join("replay"));
    let second = run_experiment(&replay)?;
    let same = std::fs::read(&first.csv_path)? == std::fs::read(&second.csv_path)?;
    println!("exit {}, replay identical: {same}", first.exit_code);

    let bad = ExperimentConfig::from_toml(&CONFIG.replace("0.9", "1.5"));
    println!("{}", bad.and_then(|c| c.validate()).unwrap_err());
    Ok(())
}
