use std::path::PathBuf;
use std::process::ExitCode;

use bose_complexity::harness::{self, HarnessError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bose-complexity",
    version,
    about = "Run lattice-boson experiments from JSON configs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(Opts),
    /// Run the experiment once per value in the config's sweep block.
    Sweep(Opts),
}

#[derive(Args)]
struct Opts {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for sweep points; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Output file, overriding the config's `output`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn execute(command: &Command) -> Result<String, HarnessError> {
    let (opts, is_sweep) = match command {
        Command::Run(o) => (o, false),
        Command::Sweep(o) => (o, true),
    };
    if opts.jobs == Some(0) {
        return Err(HarnessError::Config("--jobs: must be at least 1".to_string()));
    }
    let cfg = harness::load_config(&opts.config)?;
    let outcome = if is_sweep {
        harness::sweep(&cfg, opts.jobs)?
    } else {
        harness::run(&cfg)?
    };
    let path = harness::output_path(&cfg, opts.out.as_deref(), &outcome.artifact);
    let written = outcome.write(&path)?;
    let files: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
    Ok(format!(
        "{}: {} -> {}",
        cfg.experiment.as_str(),
        outcome.summary,
        files.join(", ")
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
