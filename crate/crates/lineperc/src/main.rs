fn main() {
    std::process::exit(lineperc::cli::main());
}
