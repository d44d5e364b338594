fn main() -> std::process::ExitCode {
    valign::cli::main()
}
