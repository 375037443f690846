fn main() -> std::process::ExitCode {
    geoquant::cli::main_entry()
}
