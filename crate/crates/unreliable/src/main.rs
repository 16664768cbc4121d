fn main() {
    std::process::exit(unreliable::cli::run(std::env::args_os()));
}
