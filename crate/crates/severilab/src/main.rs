fn main() {
    std::process::exit(severilab::cli::run());
}
