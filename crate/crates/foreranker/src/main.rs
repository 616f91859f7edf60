fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(foreranker::cli::try_main(&argv));
}
