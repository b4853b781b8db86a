fn main() {
    std::process::exit(indoor_qkd::cli::main(std::env::args_os()));
}
