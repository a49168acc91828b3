fn main() {
    std::process::exit(gk::cli::run(std::env::args().skip(1).collect()));
}
