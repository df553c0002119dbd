fn main() -> std::process::ExitCode {
    symmpix::cli::main()
}
