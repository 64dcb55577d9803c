fn main() {
    std::process::exit(cosymplectic::cli::run(std::env::args_os()));
}
