fn main() {
    std::process::exit(irisrec::app::cli::run(std::env::args_os()));
}
