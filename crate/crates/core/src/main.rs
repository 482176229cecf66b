fn main() {
    std::process::exit(corridor_gas::cli::run(std::env::args_os()));
}
