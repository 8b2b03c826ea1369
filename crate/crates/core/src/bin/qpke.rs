fn main() {
    std::process::exit(qpke::cli::main_with_args(std::env::args_os()));
}
