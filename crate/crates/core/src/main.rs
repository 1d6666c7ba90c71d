fn main() {
    std::process::exit(mixmorrey::cli::run_from(std::env::args_os()));
}
