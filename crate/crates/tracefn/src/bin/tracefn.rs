fn main() {
    std::process::exit(tracefn::cli::run(std::env::args_os()));
}
