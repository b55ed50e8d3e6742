fn main() {
    std::process::exit(mimostab::cli::main_with_args(std::env::args_os()));
}
