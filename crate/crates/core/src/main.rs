fn main() {
    std::process::exit(matosc::cli::main());
}
