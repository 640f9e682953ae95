fn main() {
    std::process::exit(pidflow::cli::main_with_args(std::env::args_os()));
}
