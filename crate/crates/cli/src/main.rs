fn main() {
    std::process::exit(rarbf_cli::main_with_args(std::env::args_os()));
}
