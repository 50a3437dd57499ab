fn main() {
    let args: Vec<String> = std::env::args().collect();
    std::process::exit(citeneed::cli::dispatch(args));
}
