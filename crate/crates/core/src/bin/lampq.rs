fn main() {
    std::process::exit(lamp_quality::cli::run(std::env::args_os()));
}
