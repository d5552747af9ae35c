fn main() {
    std::process::exit(rank1lab_cli::run(std::env::args_os()));
}
