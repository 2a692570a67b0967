use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use satlab_cli::{bundled_names, describe, find_bundled, run_scenario, CliError, RunOptions, Scenario, EXIT_CONFIG};

#[derive(Parser)]
#[command(name = "satlab", version, about = "Run satlab scenarios and report verdicts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a bundled scenario by name).
    Run {
        file: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Use this many nodes on every axis.
        #[arg(long)]
        resolution_override: Option<usize>,
    },
    /// List bundled scenarios.
    List,
    /// Describe a bundled scenario.
    Describe { name: String },
}

fn load(file: &str) -> Result<Scenario, CliError> {
    let path = PathBuf::from(file);
    if path.exists() {
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        return Scenario::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        });
    }
    find_bundled(file)
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return code(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let result = match cli.command {
        Command::List => {
            for n in bundled_names() {
                println!("{n}");
            }
            Ok(0)
        }
        Command::Describe { name } => find_bundled(&name).map(|sc| {
            print!("{}", describe(&sc));
            0
        }),
        Command::Run { file, out_dir, seed, resolution_override } => load(&file).and_then(|sc| {
            let report = run_scenario(&sc, &RunOptions { out_dir, seed, resolution: resolution_override })?;
            print!("{}", report.text());
            println!("outputs: {}", report.out_dir.display());
            for f in report.failures() {
                eprintln!("failed: {} {}: {} (threshold {})", f.check, f.item, f.value, f.threshold);
            }
            Ok(report.exit_code())
        }),
    };
    match result {
        Ok(c) => code(c),
        Err(e) => {
            eprintln!("error: {e}");
            code(e.exit_code())
        }
    }
}
