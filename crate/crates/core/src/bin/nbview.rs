fn main() {
    std::process::exit(nbview::cli::main(std::env::args_os()));
}
