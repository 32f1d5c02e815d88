fn main() {
    std::process::exit(tlsring::cli::dispatch(std::env::args_os()));
}
