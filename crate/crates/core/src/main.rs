fn main() {
    std::process::exit(hbayes::cli::run_from_args(std::env::args_os()));
}
