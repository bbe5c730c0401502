fn main() {
    std::process::exit(llmparser::cli::run(std::env::args_os()));
}
