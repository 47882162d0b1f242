fn main() {
    std::process::exit(planted_cli::run(std::env::args_os()));
}
