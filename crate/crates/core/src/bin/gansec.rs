fn main() {
    std::process::exit(gan_secrecy::cli::run(std::env::args_os()));
}
