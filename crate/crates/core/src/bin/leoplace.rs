use std::process::ExitCode;

fn main() -> ExitCode {
    leoplace::cli::main_with_args(std::env::args_os())
}
