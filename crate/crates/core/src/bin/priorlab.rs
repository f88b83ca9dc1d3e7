fn main() {
    std::process::exit(priorlab::cli::run(std::env::args_os()));
}
