fn main() {
    let argv: Vec<String> = std::env::args().collect();
    std::process::exit(idseries_cli::run(&argv));
}
