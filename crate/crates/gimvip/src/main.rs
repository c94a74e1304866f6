use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(gimvip::shell::run_from(std::env::args_os()))
}
