fn main() {
    std::process::exit(qwigner::cli::run());
}
