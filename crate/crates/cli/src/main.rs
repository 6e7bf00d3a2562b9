fn main() {
    std::process::exit(epcore_cli::main_with_args(std::env::args_os()));
}
