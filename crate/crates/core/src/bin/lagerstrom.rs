fn main() {
    std::process::exit(lagerstrom::cli::run(std::env::args_os()));
}
