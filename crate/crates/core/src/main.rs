fn main() -> std::process::ExitCode {
    spipca::cli::main()
}
