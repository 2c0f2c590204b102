fn main() {
    std::process::exit(explainable_search::cli::run(std::env::args_os()));
}
