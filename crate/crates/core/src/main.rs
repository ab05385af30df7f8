fn main() {
    std::process::exit(sqclab::cli::run(std::env::args_os()));
}
