fn main() {
    std::process::exit(ompmmv::cli::dispatch(std::env::args_os()));
}
