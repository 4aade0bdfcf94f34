fn main() {
    std::process::exit(lcl_cli::run(std::env::args_os()));
}
