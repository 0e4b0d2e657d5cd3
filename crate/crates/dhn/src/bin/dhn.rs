fn main() {
    std::process::exit(dhn::cli::run(std::env::args_os()));
}
