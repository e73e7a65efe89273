fn main() {
    std::process::exit(monopole_atlas::cli::run(std::env::args_os()));
}
