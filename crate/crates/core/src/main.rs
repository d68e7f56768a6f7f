fn main() -> std::process::ExitCode {
    explore_core::cli::main()
}
