fn main() {
    std::process::exit(judgekit::cli::run(std::env::args_os()));
}
