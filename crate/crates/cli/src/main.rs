fn main() {
    std::process::exit(barista_cli::main_with_args(std::env::args_os()));
}
