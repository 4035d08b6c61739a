fn main() {
    std::process::exit(dpd_cli::run());
}
