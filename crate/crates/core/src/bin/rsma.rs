fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(rsma_mobility::cli::cli_main(&args));
}
