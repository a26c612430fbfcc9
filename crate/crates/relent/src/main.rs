fn main() { std::process::exit(relent::cli::run(std::env::args_os())) }
