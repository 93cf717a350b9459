use std::process::ExitCode;

use clap::Parser;
use kruskal_cmc_cli::cli::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match kruskal_cmc_cli::run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
