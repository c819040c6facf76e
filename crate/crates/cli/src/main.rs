fn main() {
    std::process::exit(unshade_cli::run(std::env::args_os()));
}
