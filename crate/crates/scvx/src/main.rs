fn main() {
    std::process::exit(scvx::cli::main_with(std::env::args_os()));
}
