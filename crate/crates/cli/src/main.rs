use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tcmfg_cli::{run_file, Format, Mode, RunOptions};

#[derive(Parser)]
#[command(name = "tcmfg", version, about = "Time-changed Lévy mean field game solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario and run its checks.
    Run {
        file: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "mfg")]
        mode: Mode,
        /// Overwrite a non-empty output directory.
        #[arg(long)]
        force: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn threads() -> Result<(), String> {
    let Ok(v) = std::env::var("TCMFG_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| format!("TCMFG_THREADS must be a positive integer, got `{v}`"))?;
    if n == 0 {
        return Err("TCMFG_THREADS must be positive".into());
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let Command::Run { file, out, mode, force, seed, format } = cli.command;
    let opts = RunOptions { out, mode, force, seed, format };
    match run_file(&file, &opts) {
        Ok(outcome) => {
            eprint!("{}", outcome.validation);
            print!("{}", outcome.report);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
