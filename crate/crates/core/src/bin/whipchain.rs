fn main() {
    std::process::exit(whipchain::cli::dispatch(std::env::args_os()));
}
