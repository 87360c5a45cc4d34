fn main() {
    std::process::exit(pointwise::cli::run(std::env::args_os()));
}
