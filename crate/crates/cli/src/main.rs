fn main() {
    std::process::exit(refgeo_cli::main_with_args(std::env::args_os()));
}
