fn main() {
    std::process::exit(butterfly::harness::cli_main(std::env::args_os()));
}
