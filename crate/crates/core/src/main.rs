fn main() {
    std::process::exit(cyclone::cli::main_with_env());
}
