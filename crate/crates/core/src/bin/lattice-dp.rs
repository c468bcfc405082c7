fn main() {
    let code = lattice_dp::cli::run_from(std::env::args_os(), &mut std::io::stderr());
    std::process::exit(code);
}
