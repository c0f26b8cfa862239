fn main() {
    std::process::exit(anosov_cli::run(std::env::args_os()));
}
