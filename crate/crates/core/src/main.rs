fn main() {
    std::process::exit(reluk::cli::run(std::env::args_os()));
}
