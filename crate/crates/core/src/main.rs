fn main() {
    std::process::exit(zollforms::cli::run(std::env::args_os()));
}
