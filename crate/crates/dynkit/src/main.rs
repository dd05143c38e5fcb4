fn main() {
    std::process::exit(dynkit::cli::run(std::env::args_os()));
}
