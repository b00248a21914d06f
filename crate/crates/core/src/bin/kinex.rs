fn main() {
    std::process::exit(kinex::cli::main_with_args(std::env::args_os()));
}
