fn main() {
    std::process::exit(pattern_cohesion::cli::run());
}
