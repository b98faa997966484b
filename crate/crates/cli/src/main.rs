fn main() {
    std::process::exit(nsch_cli::cli_main(std::env::args_os()));
}
