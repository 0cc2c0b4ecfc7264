fn main() {
    std::process::exit(pfrmt_core::cli::run(std::env::args_os()));
}
