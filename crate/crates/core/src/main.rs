fn main() {
    std::process::exit(nikishin_lab::cli::main_with(std::env::args_os()));
}
