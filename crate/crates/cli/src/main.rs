fn main() {
    std::process::exit(echo_rmt_cli::run(std::env::args_os()));
}
