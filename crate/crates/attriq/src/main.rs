fn main() {
    std::process::exit(attriq::cli::run());
}
