fn main() {
    std::process::exit(portwave::cli::run(std::env::args_os()));
}
