fn main() {
    std::process::exit(setlat_cli::run_args(std::env::args_os()));
}
