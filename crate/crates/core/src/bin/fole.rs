fn main() {
    std::process::exit(fole::cli::main_with_args());
}
