fn main() {
    std::process::exit(realcert_cli::run(std::env::args_os().skip(1)));
}
