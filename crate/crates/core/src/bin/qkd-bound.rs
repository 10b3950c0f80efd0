fn main() {
    std::process::exit(qkd_bsa::cli::run(std::env::args_os()));
}
