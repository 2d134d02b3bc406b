use std::process::ExitCode;

fn main() -> ExitCode {
    ybx::cli::main_with_args()
}
