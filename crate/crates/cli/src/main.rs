use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use magtor_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(outcome) => {
            let mut out = std::io::stdout().lock();
            // a closed pipe must not turn a finished run into a failure
            let _ = writeln!(out, "{}", outcome.summary);
            for f in &outcome.files {
                let _ = writeln!(out, "  wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("magtor: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
