fn main() {
    std::process::exit(vco::cli::run(std::env::args_os()));
}
