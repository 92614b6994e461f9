use std::process::ExitCode;

fn main() -> ExitCode {
    maxgrowth_cli::run(std::env::args_os())
}
