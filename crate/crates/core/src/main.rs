fn main() {
    std::process::exit(treefrag::cli::run());
}
