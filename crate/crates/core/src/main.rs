fn main() {
    std::process::exit(tamecheck::cli::main_with(std::env::args_os()));
}
