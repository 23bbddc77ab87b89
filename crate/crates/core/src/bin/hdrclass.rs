fn main() {
    std::process::exit(hdrclass::cli::dispatch(std::env::args_os()));
}
