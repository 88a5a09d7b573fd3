fn main() {
    std::process::exit(rancher::cli::run(std::env::args_os()));
}
