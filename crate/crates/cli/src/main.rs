fn main() {
    std::process::exit(fch_cli::main_with(std::env::args_os()));
}
