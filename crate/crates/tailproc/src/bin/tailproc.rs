use std::process::ExitCode;

fn main() -> ExitCode {
    tailproc::cli::run()
}
