use std::process::ExitCode;

use clap::Parser;
use fsc_cli::{error_exit_code, execute, write_output, Cli, Status};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage errors are input errors; exit code 2 means a partial result.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let rendered = match execute(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(error_exit_code(&e) as u8);
        }
    };
    for note in &rendered.notes {
        eprintln!("note: {note}");
    }
    if let Err(e) = write_output(cli.command.output(), &rendered.body) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    match rendered.status {
        Status::Complete => ExitCode::SUCCESS,
        Status::Partial => ExitCode::from(2),
    }
}
