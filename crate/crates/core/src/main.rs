fn main() {
    std::process::exit(gaplab::cli::run(std::env::args_os()));
}
