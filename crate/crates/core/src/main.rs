fn main() {
    std::process::exit(bse_lobpcg::cli::run(std::env::args_os()));
}
