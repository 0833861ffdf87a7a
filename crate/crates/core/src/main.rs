fn main() {
    std::process::exit(coarsebound::cli::run());
}
