fn main() -> std::process::ExitCode {
    clpnet::cli::main()
}
