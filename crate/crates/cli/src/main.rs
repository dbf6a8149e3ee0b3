use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use swp_lmmse_cli::{run, Cli, EXIT_ARGS, EXIT_IO};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_ARGS) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(stdout) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(stdout.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(EXIT_IO);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("swp-lmmse: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
