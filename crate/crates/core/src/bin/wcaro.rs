fn main() {
    std::process::exit(wcaro::cli::run(std::env::args_os()));
}
