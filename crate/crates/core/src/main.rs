fn main() {
    std::process::exit(schottky_lax::cli::run(std::env::args_os()));
}
