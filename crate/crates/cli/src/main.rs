fn main() {
    std::process::exit(ginibre_cli::dispatch(std::env::args_os()));
}
