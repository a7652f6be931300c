use std::process;

fn main() {
    process::exit(orthoweak_cli::run(std::env::args_os()));
}
