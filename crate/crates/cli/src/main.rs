fn main() {
    std::process::exit(ncg_cli::run::run(std::env::args_os()));
}
