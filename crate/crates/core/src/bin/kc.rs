fn main() {
    std::process::exit(rkhs_coreset::cli::main_with(std::env::args_os()));
}
