fn main() {
    std::process::exit(finsler_project::cli::run(std::env::args_os()));
}
