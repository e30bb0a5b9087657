fn main() {
    std::process::exit(hsfc_core::cli::run(std::env::args_os()));
}
