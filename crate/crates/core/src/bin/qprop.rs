use std::process::ExitCode;

use clap::Parser;
use qprop::cli::{execute, exit_code_for, Cli, EXIT_USAGE};
use qprop::scenario::parse_scenario;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match std::fs::read_to_string(&cli.scenario) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {}: {e}", cli.scenario.display());
            return ExitCode::from(EXIT_USAGE as u8);
        }
    };
    let result = parse_scenario(&text).and_then(|scn| execute(&scn, &cli.command));
    match result {
        Ok(out) => {
            print!("{}", out.text);
            ExitCode::from(out.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {}: {e}", cli.scenario.display());
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
