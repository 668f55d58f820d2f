use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fracobs_cli::{cmd_compare, cmd_dump_config, cmd_run, cmd_validate, CliError, Outcome};

#[derive(Parser)]
#[command(name = "fracobs", version, about = "Fractional super-twisting observer experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate plant and observer from a config and write trace, metrics and manifest.
    Run {
        config: PathBuf,
        #[arg(long, env = "FRACOBS_OUT_DIR", default_value = "fracobs-out")]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Override a config value, e.g. `--set grid.t_end=20`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Run the two configured observer variants on one plant run and compare them.
    Compare {
        config: PathBuf,
        #[arg(long, env = "FRACOBS_OUT_DIR", default_value = "fracobs-out")]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Check the numerical primitives against closed-form oracles.
    Validate,
    /// Print a bundled config (example1, example2).
    DumpConfig { preset: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result: Result<Outcome, CliError> = match cli.command {
        Command::Run { config, out, seed, set } => cmd_run(&config, &out, seed, &set),
        Command::Compare { config, out, set } => cmd_compare(&config, &out, &set),
        Command::Validate => Ok(cmd_validate()),
        Command::DumpConfig { preset } => cmd_dump_config(&preset),
    };
    match result {
        Ok(o) => {
            print!("{}", o.stdout);
            ExitCode::from(o.exit as u8)
        }
        Err(e) => {
            eprintln!("fracobs: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
