fn main() {
    std::process::exit(stegohawk::cli::run());
}
