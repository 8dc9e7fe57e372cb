fn main() {
    std::process::exit(wiretap_core::cli::main_with_args(std::env::args_os()));
}
