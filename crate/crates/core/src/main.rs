fn main() {
    std::process::exit(repgame::cli::cli_main(std::env::args_os()));
}
