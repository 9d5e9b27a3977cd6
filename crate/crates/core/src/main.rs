fn main() { std::process::exit(focal_search::cli::run()) }
