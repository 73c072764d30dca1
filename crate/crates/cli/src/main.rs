fn main() {
    std::process::exit(carnot_tangent_cli::main_with_args(std::env::args_os()));
}
