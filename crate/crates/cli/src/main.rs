fn main() {
    std::process::exit(curvemom_cli::run_from_args(std::env::args_os()));
}
