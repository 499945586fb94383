fn main() {
    std::process::exit(produpd::cli::run(std::env::args_os()).code());
}
