use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use monotone_play::cli::{run, Command};

/// Run a monotone-game experiment from a JSON config.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    env_logger::init();
    let args = Args::parse();
    let code = run(args.command, &args.config, args.out.as_deref());
    ExitCode::from(code as u8)
}
