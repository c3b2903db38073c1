fn main() {
    std::process::exit(wavemap_cli::run(std::env::args_os()));
}
