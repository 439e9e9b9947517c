fn main() {
    std::process::exit(slowclt::cli::run(std::env::args_os()));
}
