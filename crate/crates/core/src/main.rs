fn main() {
    std::process::exit(loftune::cli::run_from(std::env::args_os()));
}
