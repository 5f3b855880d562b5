fn main() {
    std::process::exit(itinera_cli::run(std::env::args_os()));
}
