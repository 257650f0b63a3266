fn main() -> std::process::ExitCode {
    ensemble_select::cli::main()
}
