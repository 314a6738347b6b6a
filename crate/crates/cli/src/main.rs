use std::process::ExitCode;

use clap::Parser;
use dockpuzzle_cli::{init_logging, run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_logging(&cli.log_level);
    run(cli)
}
