fn main() {
    std::process::exit(mhahn::cli::run(std::env::args_os()));
}
