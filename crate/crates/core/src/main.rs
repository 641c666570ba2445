fn main() {
    std::process::exit(isoalg::cli::main_with_args(std::env::args_os()));
}
