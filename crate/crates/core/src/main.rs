fn main() {
    std::process::exit(phibvp::cli::main_exit_code());
}
