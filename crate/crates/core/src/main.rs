fn main() {
    std::process::exit(twostage::cli::run_cli(std::env::args_os()));
}
