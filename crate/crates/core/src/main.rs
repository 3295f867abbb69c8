fn main() {
    std::process::exit(curvwell::cli::main_with_args(std::env::args_os()));
}
