fn main() {
    std::process::exit(latsurj::cli::run_cli(std::env::args().collect()));
}
