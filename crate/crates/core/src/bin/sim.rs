fn main() {
    std::process::exit(polarsim::cli::main_with_args(std::env::args_os()));
}
