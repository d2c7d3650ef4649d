fn main() {
    std::process::exit(greedy_atoms::cli::run_from(std::env::args_os()));
}
