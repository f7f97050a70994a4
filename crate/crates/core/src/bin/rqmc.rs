fn main() {
    std::process::exit(rqmc::cli::run(std::env::args_os()));
}
