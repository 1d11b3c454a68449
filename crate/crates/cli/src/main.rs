fn main() {
    std::process::exit(arw_cli::run(std::env::args().collect()));
}
