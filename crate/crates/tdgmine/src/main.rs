fn main() {
    std::process::exit(tdgmine::cli::run(std::env::args_os()));
}
