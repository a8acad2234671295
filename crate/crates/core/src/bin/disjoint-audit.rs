fn main() {
    std::process::exit(disjoint_audit::cli::main());
}
