fn main() {
    std::process::exit(hvp_core::cli::run(std::env::args_os()));
}
