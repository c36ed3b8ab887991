use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use wishart_gp::runner::{run_experiment, ExperimentConfig};
use wishart_gp::synthetic::{draw, GeneratorName, GeneratorSpec};

#[derive(Parser)]
#[command(
    name = "wishart-gp",
    version,
    about = "GP regression with self-assembled Wishart priors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (spec, seed) cell of a study.
    Run { config: PathBuf },
    /// Write a synthetic dataset to CSV.
    Synth {
        generator: GeneratorName,
        seed: u64,
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        n_train: usize,
        #[arg(long, default_value_t = 150)]
        n_test: usize,
    },
    /// Check a configuration file without running it.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config } => ExperimentConfig::from_file(&config).and_then(|cfg| {
            let report = run_experiment(&cfg)?;
            for row in &report.summary {
                let cells: Vec<String> = row
                    .metrics
                    .iter()
                    .map(|m| match (m.mean, m.sd) {
                        (Some(mean), Some(sd)) => format!("{}={mean:.6} ({sd:.6})", m.name),
                        (Some(mean), None) => format!("{}={mean:.6}", m.name),
                        _ => format!("{}=-", m.name),
                    })
                    .collect();
                println!(
                    "{}: {} run(s), {} failed; {}",
                    row.spec,
                    row.runs,
                    row.failed,
                    cells.join(", ")
                );
            }
            Ok(report.failures())
        }),
        Command::Synth {
            generator,
            seed,
            out,
            n_train,
            n_test,
        } => draw(&GeneratorSpec::with_sizes(generator, n_train, n_test), seed)
            .and_then(|d| d.write_csv_file(&out))
            .map(|_| 0),
        Command::Validate { config } => ExperimentConfig::from_file(&config).map(|cfg| {
            println!(
                "ok: {} spec(s) x {} seed(s), config hash {}",
                cfg.specs.len(),
                cfg.seeds.len(),
                cfg.hash()
            );
            0
        }),
    };
    match outcome {
        Ok(0) => ExitCode::SUCCESS,
        Ok(failed) => {
            eprintln!("{failed} cell(s) failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
