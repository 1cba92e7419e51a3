fn main() -> std::process::ExitCode {
    dominant_features::cli::main()
}
