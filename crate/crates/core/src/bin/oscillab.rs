fn main() -> std::process::ExitCode {
    oscillab::cli::main()
}
