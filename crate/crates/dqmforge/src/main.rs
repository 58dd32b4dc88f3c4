use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(dqmforge::cli::main_from(std::env::args_os()))
}
