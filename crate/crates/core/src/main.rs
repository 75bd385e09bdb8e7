fn main() {
    std::process::exit(fluidq::cli::run(std::env::args_os()));
}
