fn main() {
    std::process::exit(qrr::cli::main_with_args(std::env::args_os()));
}
