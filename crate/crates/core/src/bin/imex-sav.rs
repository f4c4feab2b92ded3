fn main() {
    std::process::exit(imex_sav::cli::main_with_args(std::env::args_os()));
}
