use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(flux::cli::run())
}
