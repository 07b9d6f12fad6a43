fn main() -> std::process::ExitCode {
    sweepcert::cli::main()
}
