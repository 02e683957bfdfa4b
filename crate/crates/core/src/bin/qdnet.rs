fn main() {
    let result = qdnet::cli::run(std::env::args_os());
    std::process::exit(result.exit_code);
}
