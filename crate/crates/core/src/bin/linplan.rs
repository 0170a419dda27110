fn main() -> std::process::ExitCode {
    std::process::ExitCode::from(linplan::harness::cli::run_cli(std::env::args_os()))
}
