use std::path::PathBuf;
use std::process::ExitCode;

use carleson_core::harness::{self, ExperimentConfig};
use clap::{Parser, Subcommand};

/// Run numerical experiments on random discrete Carleson operators.
#[derive(Debug, Parser)]
#[command(name = "carleson", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Replaces the `seed` key.
        #[arg(long)]
        seed: Option<u64>,
        /// Replaces the `output_path` key.
        #[arg(long)]
        out: Option<PathBuf>,
        /// `key=value`, applied in order after the file; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// List registered experiments.
    List,
}

fn load(
    config: &PathBuf,
    seed: Option<u64>,
    out: Option<PathBuf>,
    overrides: &[String],
) -> carleson_core::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(config)?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    for kv in overrides {
        cfg.apply_override(kv)?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output_path = o.to_string_lossy().into_owned();
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            print!("{}", harness::list_experiments());
            ExitCode::SUCCESS
        }
        Command::Run {
            config,
            seed,
            out,
            overrides,
        } => {
            let cfg = match load(&config, seed, out, &overrides) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            match harness::run(&cfg) {
                Ok(outcome) => {
                    for c in &outcome.report.checks {
                        println!(
                            "{} {} = {:.6e} ({:e})",
                            if c.passed() { "PASS" } else { "FAIL" },
                            c.name,
                            c.value,
                            c.threshold
                        );
                    }
                    println!("wrote {} in {:.2}s", outcome.output.display(), outcome.seconds);
                    if outcome.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
