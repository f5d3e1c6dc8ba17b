use std::process::ExitCode;

use fraceq_cli::{parse_args, run, CliError};

fn main() -> ExitCode {
    let code = match parse_args(std::env::args().skip(1)) {
        Ok(config) => run(&config),
        Err(CliError::Help(text)) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("fraceq: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
