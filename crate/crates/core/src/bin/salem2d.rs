fn main() {
    std::process::exit(salem2d::cli::run(std::env::args_os()));
}
