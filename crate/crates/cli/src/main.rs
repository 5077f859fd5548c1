use std::process::ExitCode;

use rabi_cli::{init_threads, parse_config, run, CliError};

fn main() -> ExitCode {
    let result = parse_config(std::env::args_os()).and_then(|cfg| {
        init_threads()?;
        run(&cfg)
    });
    match result {
        Ok(outcome) => ExitCode::from(outcome.code() as u8),
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("rabi: {e}");
            ExitCode::from(1)
        }
    }
}
