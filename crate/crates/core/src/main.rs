fn main() {
    std::process::exit(rzt_core::cli::main_with_args(std::env::args_os()));
}
