fn main() {
    std::process::exit(ksreduce::cli::run(std::env::args_os()));
}
