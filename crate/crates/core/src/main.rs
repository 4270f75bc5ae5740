fn main() {
    std::process::exit(genn::cli::run(std::env::args_os()));
}
