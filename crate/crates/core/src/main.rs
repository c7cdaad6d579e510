use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = sicvec::cli::Cli::parse();
    ExitCode::from(sicvec::cli::run(cli))
}
