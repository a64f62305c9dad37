use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use speclab::report::{run, Command, RunConfig};

#[derive(Clone, Copy, ValueEnum)]
enum Cmd {
    Eig,
    Torsion,
    Asym,
    Verify,
    Sweep,
    Sharpness,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Eig => Command::Eig,
            Cmd::Torsion => Command::Torsion,
            Cmd::Asym => Command::Asym,
            Cmd::Verify => Command::Verify,
            Cmd::Sweep => Command::Sweep,
            Cmd::Sharpness => Command::Sharpness,
        }
    }
}

/// Dirichlet eigenvalue, torsion and asymmetry experiments driven by a TOML config.
#[derive(Parser)]
#[command(name = "speclab", version)]
struct Args {
    /// What to run; overrides `command` in the config.
    #[arg(value_enum)]
    command: Cmd,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("speclab: {e}");
            return ExitCode::from(2);
        }
    };
    config.command = args.command.into();
    if args.jobs.is_some() {
        config.jobs = args.jobs;
    }
    match run(&config, args.out.as_deref()) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            println!("wrote {} files", outcome.files.len());
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("speclab: {e}");
            ExitCode::from(2)
        }
    }
}
