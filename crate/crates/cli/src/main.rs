use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = clines::Cli::parse();
    match clines::run(&cli, &mut std::io::stdout()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("clines: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
