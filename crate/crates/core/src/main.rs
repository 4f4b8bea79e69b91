use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use invivo_channel::cli::{run, Cli, CliError};

fn write_output(cli: &Cli, bytes: &[u8]) -> Result<(), CliError> {
    match &cli.output {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(bytes)
            .map_err(|e| CliError::input(format!("stdout: {e}"))),
    }
}

fn refuses_to_overwrite_input(cli: &Cli) -> Option<CliError> {
    let out = cli.output.as_ref()?.canonicalize().ok()?;
    cli.input_paths()
        .into_iter()
        .filter_map(|a| a.canonicalize().ok())
        .any(|p| p == out)
        .then(|| CliError::usage(format!("refusing to overwrite input file {}", out.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match refuses_to_overwrite_input(&cli) {
        Some(e) => Err(e),
        None => run(&cli).and_then(|bytes| write_output(&cli, &bytes)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
