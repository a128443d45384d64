fn main() {
    std::process::exit(ntn_lab::cli::run(std::env::args_os()));
}
