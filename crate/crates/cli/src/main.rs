fn main() {
    std::process::exit(qaforge_cli::run(std::env::args_os()));
}
