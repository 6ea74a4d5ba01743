fn main() {
    std::process::exit(qfgcpe_cli::run(std::env::args_os()));
}
