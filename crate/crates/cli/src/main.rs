use std::process::ExitCode;

use clap::Parser;
use fso_linklab_cli::{configure_threads, execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| execute(cli, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fso-linklab: {e}");
            ExitCode::from(e.code)
        }
    }
}
