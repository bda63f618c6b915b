use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use erb::experiment::{run_experiment, ExperimentConfig, Unit, EXIT_INPUT, EXIT_OK, EXIT_VIOLATION};

#[derive(Parser)]
#[command(name = "erb", version, about = "Entropy-rate bounds for stationary processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Nats,
    Bits,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config (or replay a JSON run record).
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        unit: Option<UnitArg>,
    },
    /// List built-in densities and process models.
    ListCorpus,
    /// Run the acceptance suite.
    Check,
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn run(config: PathBuf, seed: Option<u64>, out: Option<PathBuf>, unit: Option<UnitArg>) -> ExitCode {
    let mut cfg = match ExperimentConfig::load(&config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return code(EXIT_INPUT);
        }
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.out = Some(o);
    }
    if let Some(u) = unit {
        cfg.unit = match u {
            UnitArg::Nats => Unit::Nats,
            UnitArg::Bits => Unit::Bits,
        };
    }
    match run_experiment(&cfg) {
        Ok(outcome) => {
            println!("wrote {} and {}", outcome.csv_path.display(), outcome.json_path.display());
            for v in &outcome.violations {
                eprintln!("violation: {}\n{}", v.check, serde_json::to_string_pretty(&v.detail).unwrap_or_default());
            }
            code(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            code(EXIT_INPUT)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, seed, out, unit } => run(config, seed, out, unit),
        Command::ListCorpus => {
            print!("{}", erb::corpus::list_corpus());
            code(EXIT_OK)
        }
        Command::Check => {
            let mut ok = true;
            for r in erb::validation::run_all() {
                println!("{r}");
                ok &= r.pass;
            }
            code(if ok { EXIT_OK } else { EXIT_VIOLATION })
        }
    }
}
