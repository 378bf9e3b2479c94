fn main() {
    std::process::exit(orbit_features::cli::main(std::env::args_os()));
}
