fn main() {
    std::process::exit(eprsim::cli::main_with_args(std::env::args_os()));
}
