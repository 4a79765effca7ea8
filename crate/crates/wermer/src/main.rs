fn main() {
    std::process::exit(wermer::cli_main());
}
