fn main() {
    std::process::exit(dcoset_cli::run(std::env::args_os()));
}
