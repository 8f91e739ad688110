fn main() {
    std::process::exit(zeno_subspace::experiments::cli::main());
}
