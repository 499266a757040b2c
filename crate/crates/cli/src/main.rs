use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let result = locpv_cli::init_threads()
        .and_then(|_| locpv_cli::parse_args(&argv))
        .and_then(|cfg| locpv_cli::run_command(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(locpv_cli::CliError::Help(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
