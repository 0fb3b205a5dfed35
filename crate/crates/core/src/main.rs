fn main() {
    std::process::exit(phasedisc::cli::run(std::env::args_os()));
}
