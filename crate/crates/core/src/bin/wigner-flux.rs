fn main() {
    std::process::exit(wigner_flux::cli::main());
}
