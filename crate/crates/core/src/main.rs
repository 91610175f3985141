fn main() {
    std::process::exit(quadnls::cli::main_with_args(std::env::args_os()));
}
