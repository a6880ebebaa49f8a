use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use hidmom_cli::error::EXIT_INVALID_CONFIG;
use hidmom_cli::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_INVALID_CONFIG as u8),
            };
        }
    };
    let code = hidmom_cli::run(&cli, &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    ExitCode::from(code as u8)
}
