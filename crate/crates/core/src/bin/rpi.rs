fn main() {
    std::process::exit(rpi_core::cli::main_from_args(std::env::args_os()));
}
