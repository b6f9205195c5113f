fn main() -> std::process::ExitCode {
    spectral_saliency::cli::main()
}
