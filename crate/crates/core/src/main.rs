fn main() {
    std::process::exit(speller::cli::run(std::env::args_os()));
}
