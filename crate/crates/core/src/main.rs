fn main() -> std::process::ExitCode {
    poplabel::cli::main()
}
