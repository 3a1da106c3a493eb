fn main() {
    std::process::exit(meanvort::cli::main(std::env::args_os()));
}
