fn main() {
    std::process::exit(pmlab::cli::main_with_args(std::env::args_os()));
}
