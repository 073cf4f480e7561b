fn main() -> std::process::ExitCode {
    morphnet::cli::main()
}
