fn main() {
    std::process::exit(melzak::cli::run(std::env::args_os()));
}
