fn main() {
    std::process::exit(tnmf::cli::main_with_args(std::env::args_os()));
}
