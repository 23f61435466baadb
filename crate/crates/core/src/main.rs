fn main() {
    std::process::exit(g2harmonic::cli::main_entry());
}
