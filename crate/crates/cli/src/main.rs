use std::process::ExitCode;

use clap::Parser;

use casimir_rect_cli::{configure_threads, run, RunConfig};

fn main() -> ExitCode {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let result = configure_threads().and_then(|_| run(&config, &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("casimir-rect: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
