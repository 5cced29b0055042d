fn main() {
    std::process::exit(polarphase::cli::run());
}
