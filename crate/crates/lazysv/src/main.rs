fn main() {
    std::process::exit(lazysv::run(std::env::args_os()));
}
