fn main() {
    std::process::exit(hesssym::cli::main_with_args(std::env::args_os()));
}
