fn main() {
    std::process::exit(levy_cli::run(std::env::args_os()));
}
