fn main() {
    std::process::exit(hormander::cli::main_entry());
}
