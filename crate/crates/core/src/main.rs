fn main() {
    std::process::exit(symsat::cli::run(std::env::args_os()));
}
