use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(meta_evolve::cli::main_with_args(std::env::args_os()))
}
