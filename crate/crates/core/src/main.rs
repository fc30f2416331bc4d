fn main() {
    std::process::exit(uwbocc::cli::run(std::env::args_os()));
}
