fn main() {
    std::process::exit(molcap::cli::run(std::env::args_os()));
}
