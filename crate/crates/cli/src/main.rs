fn main() {
    std::process::exit(mflow_cli::main_with(std::env::args_os()));
}
