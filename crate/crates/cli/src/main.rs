use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = pecam_cli::Cli::parse();
    match pecam_cli::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
