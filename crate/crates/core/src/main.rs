fn main() -> std::process::ExitCode {
    pseudoboson::cli::main_with(std::env::args_os())
}
