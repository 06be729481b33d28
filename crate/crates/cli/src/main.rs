fn main() {
    std::process::exit(normlab_cli::app::main_with_args(std::env::args_os()));
}
